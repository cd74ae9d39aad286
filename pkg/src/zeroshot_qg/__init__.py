"""Zero-shot question generation from knowledge-base triples.

A desk-scale encoder-decoder that pairs each input (subject, predicate,
object) fact with three textual contexts and part-of-speech copy actions,
plus the data pipeline, retrieval/neural baselines, fold protocol and
evaluation metrics around it.

Library entry points: :class:`zeroshot_qg.model.QGModel` for the model
itself, :class:`zeroshot_qg.harness.Experiment` for whole experiments and
``zeroshot_qg.cli`` for the command line.
"""

__version__ = "0.1.0"

from .expconfig import ExperimentConfig, parse_config
from .harness import Experiment
from .kb import TranseConfig, TransEModel, transe_train
from .model import ModelConfig, QGModel, TrainConfig

__all__ = [
    "Experiment",
    "ExperimentConfig",
    "ModelConfig",
    "QGModel",
    "TrainConfig",
    "TranseConfig",
    "TransEModel",
    "parse_config",
    "transe_train",
    "__version__",
]
