"""Deep relevance matching model for ad-hoc retrieval."""

from .embed import EmbeddingStore, cosine, interactions, load_embeddings
from .firststage import RetrievalParams, bm25_score, ql_score, retrieve
from .histogram import BinScheme, bin_index, histogram, kmax_input
from .index import InvertedIndex, build_index
from .model import DrmmModel, NetworkConfig, gate_weights, gradients, score, term_forward
from .textpipe import TextPipeline, remove_stopwords, stem, tokenize

__version__ = "0.1.0"

__all__ = [
    "BinScheme", "DrmmModel", "EmbeddingStore", "InvertedIndex", "NetworkConfig", "RetrievalParams",
    "TextPipeline", "bin_index", "bm25_score", "build_index", "cosine", "gate_weights", "gradients",
    "histogram", "interactions", "kmax_input", "load_embeddings", "ql_score", "remove_stopwords",
    "retrieve", "score", "stem", "term_forward", "tokenize",
]
