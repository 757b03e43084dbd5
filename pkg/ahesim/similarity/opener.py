""" The key holder: the only place where similarity scores are decrypted. """
import logging
import threading
from typing import List

from ahesim.crypto import KeyPair, Ciphertext, decrypt
from ahesim.encoding import ScaleConfig, decode_product
from ahesim.similarity.evaluator import EncryptedScore
from ahesim.similarity.scores import SimilarityScore

log = logging.getLogger(__name__)


class Opener:
    """ Decrypts and decodes :class:`EncryptedScore` objects.

        Calls are serialized on a per-opener lock, so one opener may be shared between evaluation threads.

        :param keypair: the key pair the scores were computed under.
        :param cfg: the scale configuration the scores were computed under.
    """
    def __init__(self, keypair: KeyPair, cfg: ScaleConfig):
        keypair.private.check(keypair.public)
        self._keypair = keypair
        self.cfg = cfg
        self._lock = threading.Lock()

    @property
    def public_key(self):
        return self._keypair.public

    @property
    def key_id(self) -> str:
        return self._keypair.key_id

    def open_int(self, c: Ciphertext) -> int:
        with self._lock:
            return decrypt(self._keypair.private, self._keypair.public, c)

    def open_blocks(self, per_block) -> List[float]:
        # per-block ciphertexts are always at the unweighted scale
        return [
            decode_product(self.open_int(c), self.cfg, weighted=False)
            for c in per_block
        ]

    def open(self, score: EncryptedScore) -> SimilarityScore:
        """ Decrypt the total, and the per-block ciphertexts if present, and decode them at their scale. """
        raw = self.open_int(score.ciphertext)
        per_block = None
        if score.per_block is not None:
            per_block = tuple(self.open_blocks(score.per_block))
        return SimilarityScore(query_id=score.query_id,
                               target_id=score.target_id,
                               value=decode_product(raw, self.cfg,
                                                    score.weighted_scale),
                               kind=score.kind,
                               setting=score.setting,
                               raw=raw,
                               per_block=per_block)
