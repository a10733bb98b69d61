"""Class-label vocabulary and labeling-mode rules.

Two labeling modes exist: ``binary`` (Human vs AI) and ``multiclass``
(Human plus the four TTS sources). The four TTS labels collapse to ``AI``
under binary mode; ``AI`` is never a valid multiclass label.
"""

HUMAN = "Human"
AI = "AI"

TTS_LABELS = ("IITM_TTS", "Hearling", "AmazonPolly", "VoiceMaker")

BINARY_LABELS = (HUMAN, AI)
MULTICLASS_LABELS = (HUMAN,) + TTS_LABELS

ALL_LABELS = (HUMAN,) + TTS_LABELS + (AI,)

MODES = ("binary", "multiclass")


def mode_labels(mode: str) -> tuple[str, ...]:
    """Ordered label vocabulary for a labeling mode."""
    if mode == "binary":
        return BINARY_LABELS
    if mode == "multiclass":
        return MULTICLASS_LABELS
    raise ValueError(f"unknown labeling mode {mode!r}; expected one of {MODES}")


def coerce_label(label: str, mode: str) -> str:
    """Map a raw manifest label into the vocabulary of `mode`.

    Under binary mode every TTS label becomes ``AI``. Raises ValueError for
    labels that have no legal reading in the requested mode.
    """
    valid = mode_labels(mode)
    if mode == "binary" and label in TTS_LABELS:
        return AI
    if label not in valid:
        raise ValueError(f"label {label!r} is not valid in {mode} mode")
    return label
