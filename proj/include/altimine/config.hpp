#pragma once

#include <string>

#include "altimine/annotate.hpp"
#include "altimine/eval.hpp"
#include "altimine/simgen.hpp"

namespace altimine {

// JSON config files use the config struct field names verbatim. Keys that are
// absent keep their defaults; unknown keys are rejected.

/// {"scene": {...SceneConfig}, "lidar": {...LidarConfig}, "format": "bin"|"ply"}
struct GenSceneFileConfig {
    SceneConfig scene;
    LidarConfig lidar;
    CloudFormat format = CloudFormat::XyzBin;
};
GenSceneFileConfig gen_scene_config_from_json(const std::string& text);

/// AnnotateConfig fields plus an optional "classes": [{"name", "id", "color": [r,g,b]}].
struct AnnotateFileConfig {
    AnnotateConfig annotate;
    ClassRegistry registry = ClassRegistry::default_registry();
};
AnnotateFileConfig annotate_config_from_json(const std::string& text);

EvalConfig eval_config_from_json(const std::string& text);

}  // namespace altimine
