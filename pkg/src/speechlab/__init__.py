"""speechlab: synthetic-speech detection via bicoherence and cepstral features.

The pipeline: load WAVs into canonical 5 s / 16 kHz clips, extract a 14-D
feature vector per clip (eight bicoherence moments + six cepstral
statistics), train one of six classical classifier families, and evaluate
with stratified cross-validation. A separate path renders clips as 64x64
mel-spectrogram images for CNN training.
"""

from .audio_io import (
    AudioClip,
    CANONICAL_LENGTH,
    CANONICAL_RATE,
    CorpusManifest,
    canonicalize,
    load_manifest,
    load_wav,
    resample,
    write_wav,
)
from .bicoherence import (
    BicoherenceMap,
    MomentSet,
    bicoherence_features,
    estimate_bicoherence,
    moments,
)
from .cepstral import CepstralMatrix, cepstral_features, delta, mfcc
from .classifiers import (
    BaggedTrees,
    BoostedTrees,
    FAMILIES,
    LinearDiscriminant,
    LinearSVM,
    Prediction,
    RUSBoostedTrees,
    WeightedKNN,
    load_model,
    predict_sample,
    save_model,
    train_model,
)
from .evaluation import (
    EvaluationReport,
    confusion,
    evaluate_predictions,
    kfold_cv,
    macro_f1,
    roc_auc,
    stratified_folds,
    stratified_split,
)
from .features import (
    CSV_HEADER,
    FEATURE_COLUMNS,
    FEATURE_GROUPS,
    FeatureExtractor,
    FeatureVector,
    extract,
    read_csv,
    write_csv,
)
from .melspec_image import MelImage, export_dataset, melspectrogram_image
from .synth import generate_corpus, synth_clip
from .tree import DecisionTree

__version__ = "0.1.0"
