"""Audio-visual speaker diarization toolkit."""

from ._avdiar import (
    AvdiarError,
    Checkpoint,
    Config,
    CorpusEval,
    DerBreakdown,
    DiarizeOptions,
    Linkage,
    RelationModel,
    RttmRecord,
    SweepResult,
    SweepRow,
    SyntheticCorpus,
    TrainResult,
    aggregate_der,
    brute_force_der,
    compute_der,
    diarize_corpus,
    evaluate_corpus,
    generate_corpus,
    init_model,
    load_checkpoint,
    load_config,
    load_corpus,
    parse_rttm,
    parse_rttm_file,
    run_sweep,
    save_checkpoint,
    save_corpus,
    serialize_rttm,
    split_corpus,
    train,
    validate_config,
    write_rttm_file,
)

__all__ = [
    "AvdiarError",
    "Checkpoint",
    "Config",
    "CorpusEval",
    "DerBreakdown",
    "DiarizeOptions",
    "Linkage",
    "RelationModel",
    "RttmRecord",
    "SweepResult",
    "SweepRow",
    "SyntheticCorpus",
    "TrainResult",
    "aggregate_der",
    "brute_force_der",
    "compute_der",
    "diarize_corpus",
    "evaluate_corpus",
    "generate_corpus",
    "init_model",
    "load_checkpoint",
    "load_config",
    "load_corpus",
    "parse_rttm",
    "parse_rttm_file",
    "run_sweep",
    "save_checkpoint",
    "save_corpus",
    "serialize_rttm",
    "split_corpus",
    "train",
    "validate_config",
    "write_rttm_file",
]
