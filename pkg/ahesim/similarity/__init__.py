from .scores import (ScoreKind, Setting, SimilarityScore, RetrievalResult,
                     parse_kind, ranking_key)
from .evaluator import (Evaluator, EncryptedScore, BlockedCiphertexts, orient,
                        encquery_inner, encdb_inner, blocked_similarity,
                        weighted_similarity, promote_to_weighted, plain_inner,
                        plain_block_inners, plain_weighted, quantized_inner,
                        quantized_block_inners, quantized_weighted)
from .opener import Opener
from .search import topk_search, oracle_score
