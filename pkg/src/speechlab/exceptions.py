"""Exception hierarchy shared across the toolkit."""


class SpeechLabError(Exception):
    """Base class for all toolkit-specific errors."""


class AudioFormatError(SpeechLabError, ValueError):
    """Malformed or truncated WAV container."""


class UnsupportedAudioError(AudioFormatError):
    """WAV encoding we deliberately do not decode (e.g. 24-bit PCM, mu-law)."""


class InsufficientDataError(SpeechLabError, ValueError):
    """Signal too short for the requested analysis."""


class ParameterError(SpeechLabError, ValueError):
    """Invalid analysis or training parameter."""


class CsvFormatError(SpeechLabError, ValueError):
    """Feature CSV does not conform to the frozen column contract."""


class ManifestError(SpeechLabError, ValueError):
    """Corpus manifest is malformed or violates labeling-mode rules."""


class TrainingError(SpeechLabError, RuntimeError):
    """Classifier training cannot proceed (e.g. boosting never beats chance)."""


class ModelFormatError(SpeechLabError, ValueError):
    """Model file is corrupt or not a recognized model file."""


class ModelVersionError(ModelFormatError):
    """Model file was written by a newer, incompatible format version."""


class UndefinedMetricError(SpeechLabError, ValueError):
    """Metric is undefined for the given inputs (e.g. no evaluable ROC class)."""
