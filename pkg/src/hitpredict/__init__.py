"""Hit-song prediction from chart labels, listening histories and audio features."""

from hitpredict._dates import DateWindow
from hitpredict.canonicalize import SongKey, make_song_key, normalize_text
from hitpredict.charts import ChartEntry, LabelTable, build_label_table, parse_chart_csv
from hitpredict.errors import DataError, FormatError, HitPredictError, InvariantError
from hitpredict.evaluation import CvReport, RocCurve, cross_validate, emit_report, roc_curve, stratified_folds
from hitpredict.features import Dataset, build_audio_dataset, build_listening_dataset, filter_features
from hitpredict.learners import ModelSpec, TrainedModel, score, train
from hitpredict.scrobbles import Scrobble, clean_scrobbles, parse_scrobbles
from hitpredict.synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "ChartEntry",
    "CvReport",
    "DataError",
    "DateWindow",
    "Dataset",
    "FormatError",
    "HitPredictError",
    "InvariantError",
    "LabelTable",
    "ModelSpec",
    "RocCurve",
    "Scrobble",
    "SongKey",
    "SynthConfig",
    "TrainedModel",
    "build_audio_dataset",
    "build_label_table",
    "build_listening_dataset",
    "clean_scrobbles",
    "cross_validate",
    "emit_report",
    "filter_features",
    "generate",
    "make_song_key",
    "normalize_text",
    "parse_chart_csv",
    "parse_scrobbles",
    "roc_curve",
    "score",
    "stratified_folds",
    "train",
]
