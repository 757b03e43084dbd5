from .schema import Block, BlockSchema, default_schema
from .vectors import (EmbeddingVector, EncryptedVector, WeightVector,
                      WEIGHT_PRESETS, check_same_layout)
from .ingest import ingest_jsonl, write_jsonl
from .synth import (Uniform, PlantedPattern, ArtistClusters, SyntheticCorpus,
                    synth_corpus, pattern_direction)
from .database import (Database, encrypt_vector, encrypt_collection,
                       decrypt_vector, collection_nbytes, plaintext_database,
                       encrypted_database, save_db, load_db, PLAINTEXT,
                       ENCRYPTED)
