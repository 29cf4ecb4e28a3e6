"""threadmine: mine forum dumps with embedding-based retrieval and classification.

The pipeline, end to end:

1. :mod:`threadmine.corpus` loads a JSONL forum dump (threads of posts).
2. :mod:`threadmine.preprocess` turns each thread's title + first post
   into filtered unigram/bigram tokens and builds the vocabulary.
3. :mod:`threadmine.embedding` trains skip-gram word vectors on those
   tokens.
4. :mod:`threadmine.threadspace` projects every thread into a 2m-space
   (componentwise mean ‖ componentwise max of its word vectors).
5. :mod:`threadmine.identify` selects seed threads by keyword sets and
   expands the selection by cosine similarity in thread space.
6. :mod:`threadmine.classify` trains one affinity-weighted random forest
   per user-defined class and labels threads by max-voting.
7. :mod:`threadmine.metrics` evaluates with stratified cross-validation,
   accuracy, weighted F1, and Fleiss' kappa.

The ``threadmine`` CLI (:mod:`threadmine.cli`) drives the same steps from
a flat config file.
"""

from .corpus import (
    ForumCorpus,
    LabelSet,
    Post,
    StatsReport,
    Thread,
    corpus_stats,
    load_annotations,
    load_corpus,
    load_labels,
    save_corpus,
)
from .embedding import (
    EmbeddingMatrix,
    TrainParams,
    load_embedding,
    nearest_neighbors,
    save_embedding,
    train_skipgram,
)
from .errors import (
    ClassificationError,
    ConfigError,
    CorpusError,
    EmbeddingError,
    IdentificationError,
    MetricsError,
    ProjectionError,
    ThreadMineError,
)
from .classify import (
    ClassSpec,
    ContextualFeatures,
    EnsembleModel,
    EnsembleParams,
    Prediction,
    affinity_vector,
    class_vector,
    contextual_features,
    load_model,
    predict,
    save_model,
    train_ensemble,
    weighted_thread_projection,
)
from .forest import ForestParams, RandomForest, train_forest
from .identify import (
    KeywordSet,
    SelectionResult,
    identify_threads,
    keyword_select,
    load_keyword_set,
    similarity_expand,
)
from .metrics import (
    ConfusionMatrix,
    EvalReport,
    accuracy,
    annotation_counts,
    binary_fleiss_kappa,
    evaluation_report,
    fleiss_kappa,
    stratified_kfold,
    weighted_f1,
)
from .preprocess import (
    TokenizedDoc,
    Vocabulary,
    build_vocabulary,
    extract_document,
    load_stopwords,
    preprocess_document,
    tokenize_thread,
)
from .threadspace import (
    ThreadVector,
    cosine_similarity,
    project_avg,
    project_corpus,
    project_max,
    project_thread,
)

__version__ = "0.1.0"
