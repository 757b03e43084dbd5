from .randomness import RandomSource, SystemRandomSource, SeededRandomSource
from .keys import (PublicKey, PrivateKey, KeyPair, keygen, check_key_bits,
                   save_keypair, load_public_key, load_private_key,
                   load_keypair)
from .paillier import (Ciphertext, encrypt, decrypt, add_ct, sum_ct,
                       scalar_mul, fold_scalar_mul, rerandomize, to_residue,
                       from_residue)
