"""Automatic segmentation and labeling of motion repetitions in
synchronized joint-angle + sEMG recordings, with a feature-extraction and
classification stage to validate the labels."""

__version__ = "0.1.0"

from .classify import (
    SvmModel,
    cross_validate,
    load_model,
    median_heuristic_gamma,
    rbf_kernel,
    save_model,
    svm_fit,
    svm_predict,
    train_eval_split,
)
from .config import PipelineConfig, config_hash, load_config, load_template, save_config
from .dataset import LabeledDataset, LabeledSegment, label_segments, read_dataset, write_dataset
from .features import (
    FeatureMatrix,
    FeatureSelection,
    compute_feature,
    extract_features,
    lda_rank,
    log_normalize,
    select_top2,
)
from .ingest import (
    MergedRecording,
    decode_angle_packet,
    encode_angle_packet,
    merge_streams,
    parse_recording,
    write_recording,
)
from .kinematics import AngleFrame, SkeletonFrame, angles_from_skeleton, joint_angle
from .matching import (
    DistanceProfile,
    Segment,
    Template,
    detect_local_minima,
    dtw_distance,
    extract_segments,
    mdtw_scan,
)
from .pipeline import denoise_recording, run_pipeline
from .signals import TimeSeries, bandpass_filter, notch_filter
from .ssa import SsaDecomposition, ssa_decompose, ssa_denoise
from .synth import (
    ActionSpec,
    SyntheticGroundTruth,
    SyntheticSpec,
    bicep_curl_action,
    generate_synthetic,
    lateral_raise_action,
)

__all__ = [name for name in dir() if not name.startswith("_")]
