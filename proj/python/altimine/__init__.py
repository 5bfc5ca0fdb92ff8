"""Dataset tooling for altitude-aware 3D object detection in mining scenes."""

from ._core import (  # noqa: F401
    Box3D,
    ap_r40,
    altitude_shift,
    annotate_dataset,
    apply_spec,
    bev_iou,
    classify_difficulty,
    crop,
    evaluate,
    generate_dataset,
    iou_3d,
    point_in_box,
    quaternion_to_euler,
    read_label_file,
    read_point_cloud,
    rotation_matrix,
    run_cli,
)

__version__ = "0.1.0"
