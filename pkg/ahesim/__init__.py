import os
import logging

log = logging.getLogger(__name__)

if "AHESIM_LOG_LEVEL" in os.environ:
    logging.basicConfig(
        level=getattr(logging, os.environ["AHESIM_LOG_LEVEL"].upper()))

__version__ = "0.1.0"

from ahesim.errors import *
from ahesim.encoding import ScaleConfig
from ahesim.crypto import KeyPair, PublicKey, PrivateKey, Ciphertext, keygen
