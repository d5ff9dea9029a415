# Classifier, training and evaluation
from .architecture import ArchConfig
from .classifier import BaseClassifier, LinearClassifier, SpeechCommandNet, init_classifier
from .gradients import class_gradients, input_gradient
from .training import TrainConfig, train
from .accuracy import AccuracyReport, accuracy, accuracy_from_predictions
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ArchConfig",
    "BaseClassifier",
    "LinearClassifier",
    "SpeechCommandNet",
    "init_classifier",
    "class_gradients",
    "input_gradient",
    "TrainConfig",
    "train",
    "AccuracyReport",
    "accuracy",
    "accuracy_from_predictions",
    "load_checkpoint",
    "save_checkpoint",
]
