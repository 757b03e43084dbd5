""" The ``ahesim`` command line.

    Subcommands::

        keygen         generate a key pair
        encrypt-db     ingest embeddings and store them encrypted (or plaintext, with --plaintext)
        encrypt-query  encrypt query embeddings for the encrypted-query setting
        search         top-k retrieval in either setting, or the plaintext oracle
        bench          time both encrypted settings against the plaintext baseline
        attack         run the pattern inference or creator attribution attack on a synthetic corpus
        serve          serve a plaintext database to encrypted-query clients over HTTP

    Exit codes:

    ====  ================================================================
    0     success
    2     usage error (bad or missing arguments)
    3     validation error (malformed input, schema or dimension mismatch)
    4     overflow budget violation
    5     key mismatch
    6     missing key
    7     I/O error
    ====  ================================================================
"""
import argparse
import dataclasses
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

from ahesim import config
from ahesim.crypto import (KeyPair, SeededRandomSource, check_key_bits, keygen,
                           load_keypair, load_public_key, save_keypair)
from ahesim.crypto.keys import PRIVATE_KEY_FILE, PUBLIC_KEY_FILE
from ahesim.crypto.randomness import default_source
from ahesim.encoding import ScaleConfig, overflow_budget
from ahesim.errors import (AHESimException, BudgetError, KeyMismatchError,
                           MissingKeyError, ValidationError)
from ahesim.store import (BlockSchema, EncryptedVector, WeightVector,
                          default_schema, encrypt_collection,
                          encrypted_database, ingest_jsonl, load_db,
                          plaintext_database, save_db)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4
EXIT_KEY_MISMATCH = 5
EXIT_MISSING_KEY = 6
EXIT_IO = 7

QUERY_FORMAT = "ahesim-query"


def exit_code(error: BaseException) -> int:
    """ The exit code for an error raised by a command. """
    if isinstance(error, BudgetError):
        return EXIT_BUDGET
    if isinstance(error, KeyMismatchError):
        return EXIT_KEY_MISMATCH
    if isinstance(error, MissingKeyError):
        return EXIT_MISSING_KEY
    if isinstance(error, AHESimException):
        return EXIT_VALIDATION
    if isinstance(error, OSError):
        return EXIT_IO
    raise error


@dataclasses.dataclass(frozen=True)
class CliConfig:
    """ Options shared by the subcommands, validated before any computation. """
    keys: Optional[str]
    db: Optional[str]
    out: Optional[str]
    seed: Optional[int]
    insecure_test_keys: bool
    bind: str
    scale: ScaleConfig
    workers: int

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        scale = ScaleConfig(frac_bits=args.frac_bits,
                            weight_frac_bits=args.weight_frac_bits,
                            max_abs=args.max_abs)
        if args.workers < 1:
            raise ValidationError(
                f"--workers must be at least 1, got {args.workers}")
        for name in ("input", "query"):
            path = getattr(args, name, None)
            if path is not None and not os.path.isfile(path):
                raise FileNotFoundError(f"No such file: '{path}'")
        db = getattr(args, "db", None)
        if db is not None and args.command != "encrypt-db" and \
                not os.path.isdir(db):
            raise FileNotFoundError(f"No such database directory: '{db}'")
        return cls(keys=getattr(args, "keys", None),
                   db=db,
                   out=getattr(args, "out", None),
                   seed=args.seed,
                   insecure_test_keys=args.insecure_test_keys,
                   bind=getattr(args, "bind", "127.0.0.1:8000"),
                   scale=scale,
                   workers=args.workers)

    @property
    def rng(self):
        if self.seed is None:
            return default_source()
        return SeededRandomSource(self.seed)

    def check_bits(self, bits: int):
        check_key_bits(bits, allow_insecure=self.insecure_test_keys)
        if bits in config.INSECURE_KEY_BITS:
            log.warning(f"Using insecure {bits}-bit test keys")

    def public_key(self):
        if self.keys is None:
            raise MissingKeyError("This command needs --keys")
        path = self.keys
        if os.path.isdir(path):
            path = os.path.join(path, PUBLIC_KEY_FILE)
        if not os.path.isfile(path):
            raise MissingKeyError(f"Public key file '{path}' not found")
        pk = load_public_key(path)
        self.check_bits(pk.bits)
        return pk

    def keypair(self) -> KeyPair:
        if self.keys is None:
            raise MissingKeyError("This command needs --keys with a private key")
        for name in (PUBLIC_KEY_FILE, PRIVATE_KEY_FILE):
            path = os.path.join(self.keys, name)
            if not os.path.isfile(path):
                raise MissingKeyError(f"Key file '{path}' not found")
        keypair = load_keypair(self.keys)
        self.check_bits(keypair.public.bits)
        return keypair


def _schema(args, d: Optional[int] = None) -> BlockSchema:
    d = d if d is not None else args.dim
    if d is None:
        raise ValidationError("--dim is required")
    if args.blocks:
        return BlockSchema.parse(args.blocks, d)
    return default_schema(d)


def _print_budget(cfg: ScaleConfig, d: int, n: int):
    check = overflow_budget(cfg, d, n)
    print(f"Overflow budget: d={d}, largest safe d={check.max_dimension}, "
          f"{'holds' if check.holds else 'VIOLATED'}")


def _write_json(obj, path: Optional[str]):
    text = json.dumps(obj, indent=2, sort_keys=True, default=str)
    if path is None:
        print(text)
    else:
        with open(path, "w") as f:
            f.write(text + "\n")


def cmd_keygen(args, cfg: CliConfig) -> int:
    cfg.check_bits(args.bits)
    if cfg.out is None:
        raise ValidationError("keygen needs --out")
    rng = SeededRandomSource(cfg.seed) if cfg.seed is not None else None
    keypair = keygen(args.bits, rng)
    save_keypair(keypair, cfg.out, force=args.force)
    print(f"Key {keypair.key_id} ({args.bits} bits) written to {cfg.out}")
    return EXIT_OK


def cmd_encrypt_db(args, cfg: CliConfig) -> int:
    if cfg.db is None:
        raise ValidationError("encrypt-db needs --db for the output directory")
    schema = _schema(args)
    vectors = ingest_jsonl(args.input, schema, cfg.scale, normalize=args.normalize)
    if args.plaintext:
        database = plaintext_database(vectors, schema, cfg.scale)
    else:
        pk = cfg.public_key()
        _print_budget(cfg.scale, schema.total_dim, pk.n)
        encrypted = encrypt_collection(vectors, pk, cfg.scale, cfg.rng,
                                       cfg.workers)
        database = encrypted_database(encrypted, schema, cfg.scale, pk)
    save_db(database, cfg.db)
    print(f"Stored {len(database)} {database.mode} vectors in {cfg.db}")
    return EXIT_OK


def cmd_encrypt_query(args, cfg: CliConfig) -> int:
    if cfg.out is None:
        raise ValidationError("encrypt-query needs --out")
    schema = _schema(args)
    pk = cfg.public_key()
    _print_budget(cfg.scale, schema.total_dim, pk.n)
    vectors = ingest_jsonl(args.input, schema, cfg.scale, normalize=args.normalize)
    encrypted = encrypt_collection(vectors, pk, cfg.scale, cfg.rng,
                                   cfg.workers)
    _write_json(
        {
            "format": QUERY_FORMAT,
            "schema": schema.to_json(),
            "scale": cfg.scale.to_json(),
            "key_id": pk.key_id,
            "queries": [q.to_json() for q in encrypted],
        }, cfg.out)
    print(f"Encrypted {len(encrypted)} queries to {cfg.out}")
    return EXIT_OK


def _read_query(path: str, query_id: Optional[str], schema: BlockSchema,
                scale: ScaleConfig, cfg: CliConfig):
    """ Load one query: an encrypted query file written by encrypt-query, or a JSONL embedding file. """
    with open(path, "r") as f:
        head = f.read(4096).lstrip()
    candidates = None
    if head.startswith("{") and f'"{QUERY_FORMAT}"' in head:
        with open(path, "r") as f:
            obj = json.load(f)
        if BlockSchema.from_json(obj["schema"]) != schema:
            raise ValidationError(
                "The query file and the database use different block schemas")
        pk = cfg.public_key()
        candidates = [
            EncryptedVector.from_json(q, pk, schema.schema_id)
            for q in obj["queries"]
        ]
    if candidates is None:
        candidates = ingest_jsonl(path, schema, scale)
    if not candidates:
        raise ValidationError(f"No queries in '{path}'")
    if query_id is None:
        return candidates[0]
    for q in candidates:
        if q.id == query_id:
            return q
    raise ValidationError(f"Query '{query_id}' not found in '{path}'")


def cmd_search(args, cfg: CliConfig) -> int:
    from ahesim.similarity import Opener, topk_search

    if cfg.db is None:
        raise ValidationError("search needs --db")
    pk = cfg.public_key() if cfg.keys is not None else None
    database = load_db(cfg.db, public_key=pk)
    query = _read_query(args.query, args.query_id, database.schema,
                        database.scale, cfg)

    opener = None
    encrypted_query = isinstance(query, EncryptedVector)
    if database.encrypted or encrypted_query:
        opener = Opener(cfg.keypair(), database.scale)
    elif cfg.keys is not None and not args.plaintext_oracle:
        # plaintext query and database: with keys, run the encrypted-query setting locally
        from ahesim.store import encrypt_vector
        opener = Opener(cfg.keypair(), database.scale)
        query = encrypt_vector(query, opener.public_key, database.scale,
                               cfg.rng)
    weights = None
    if args.weights:
        weights = WeightVector.parse(args.weights, database.schema)
    kind = args.kind or ("weighted" if weights is not None else "plain")

    result = topk_search(query,
                         database,
                         args.k,
                         kind,
                         opener=opener,
                         weights=weights,
                         workers=cfg.workers,
                         explain=args.explain)
    print(result.to_table())
    _write_json(result.to_json(), cfg.out)
    return EXIT_OK


def cmd_bench(args, cfg: CliConfig) -> int:
    from ahesim.bench import (BenchConfig, BenchSetting, run_bench,
                              emit_report, summary_table)

    cfg.check_bits(args.bits)
    settings = [BenchSetting(s) for s in args.settings.split(",")]
    bench = BenchConfig(dims=tuple(int(d) for d in args.dims.split(",")),
                        n=args.n,
                        reps=args.reps,
                        warmup=args.warmup,
                        setup_reps=args.setup_reps,
                        key_bits=args.bits,
                        seed=cfg.seed or 0,
                        workers=cfg.workers,
                        scale=cfg.scale)
    results = run_bench(bench, settings)
    print(summary_table(results))
    paths = emit_report(results, cfg.out or "bench.csv")
    print(f"Wrote {', '.join(paths)}")
    return EXIT_OK


def _attack_keypair(args, cfg: CliConfig) -> KeyPair:
    if cfg.keys is not None:
        return cfg.keypair()
    cfg.check_bits(args.bits)
    rng = SeededRandomSource(cfg.seed) if cfg.seed is not None else None
    return keygen(args.bits, rng)


def cmd_attack(args, cfg: CliConfig) -> int:
    from ahesim.attacks import pattern_inference_attack, run_attribution_trials
    from ahesim.similarity import Opener
    from ahesim.store import ArtistClusters, PlantedPattern, synth_corpus

    seed = cfg.seed or 0
    schema = _schema(args)
    keypair = _attack_keypair(args, cfg)
    opener = Opener(keypair, cfg.scale)

    if args.which == "pattern":
        profile = PlantedPattern(block_label=args.block,
                                 pattern_seed=seed + 1,
                                 strength=args.strength,
                                 planted_fraction=args.planted_fraction)
        corpus = synth_corpus(seed,
                              args.n,
                              schema,
                              profile,
                              noise_scale=args.noise_scale,
                              max_abs=cfg.scale.max_abs)
    else:
        profile = ArtistClusters(num_artists=args.artists, spread=args.spread)
        corpus = synth_corpus(seed,
                              args.n,
                              schema,
                              profile,
                              max_abs=cfg.scale.max_abs)

    encrypted = encrypt_collection(corpus.vectors, keypair.public, cfg.scale,
                                   cfg.rng, cfg.workers)
    database = encrypted_database(encrypted, schema, cfg.scale, keypair.public)

    if args.which == "pattern":
        report = pattern_inference_attack(corpus.pattern,
                                          args.block,
                                          database,
                                          opener,
                                          positives=corpus.planted_ids,
                                          noise=args.query_noise,
                                          seed=seed,
                                          profile=profile.to_json(),
                                          workers=cfg.workers)
        print(report.summary())
        _write_json(report.to_json(), cfg.out)
        return EXIT_OK

    trials = run_attribution_trials(corpus, database, opener, args.trials,
                                    seed, cfg.workers)
    for report in trials["reports"][:1]:
        print(report.summary())
    print(f"Attribution accuracy over {args.trials} trials: "
          f"{trials['accuracy']:.3f}")
    _write_json(
        {
            "accuracy": trials["accuracy"],
            "truths": trials["truths"],
            "reports": [r.to_json() for r in trials["reports"]],
        }, cfg.out)
    return EXIT_OK


def cmd_serve(args, cfg: CliConfig) -> int:
    import uvicorn
    from ahesim.service import create_app

    if cfg.db is None:
        raise ValidationError("serve needs --db")
    database = load_db(cfg.db)
    host, _, port = cfg.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValidationError(f"--bind must be host:port, got '{cfg.bind}'")
    app = create_app(database,
                     database.scale,
                     allow_insecure_keys=cfg.insecure_test_keys)
    uvicorn.run(app, host=host, port=int(port))
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed",
                   type=int,
                   default=None,
                   help="seed all randomness (test use; not for production keys)")
    p.add_argument("--insecure-test-keys",
                   action="store_true",
                   help="allow 512-bit test keys")
    p.add_argument("--frac-bits", type=int, default=config.FRAC_BITS)
    p.add_argument("--weight-frac-bits",
                   type=int,
                   default=config.WEIGHT_FRAC_BITS)
    p.add_argument("--max-abs", type=float, default=config.MAX_ABS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")


def _add_layout(p: argparse.ArgumentParser):
    p.add_argument("--dim", type=int, help="embedding dimension d")
    p.add_argument("--blocks",
                   help="block layout: a block count or label:length,...")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ahesim",
        description="Similarity search over additively homomorphically "
        "encrypted music embeddings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a key pair")
    _add_common(p)
    p.add_argument("--bits", type=int, default=config.KEY_BITS)
    p.add_argument("--out", required=True, help="key directory")
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("encrypt-db", help="ingest and store a database")
    _add_common(p)
    _add_layout(p)
    p.add_argument("--input", required=True, help="JSONL embeddings")
    p.add_argument("--keys", help="key directory or public key file")
    p.add_argument("--db", required=True, help="output database directory")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--plaintext",
                   action="store_true",
                   help="store without encryption (encrypted-query setting)")

    p = sub.add_parser("encrypt-query", help="encrypt query embeddings")
    _add_common(p)
    _add_layout(p)
    p.add_argument("--input", required=True, help="JSONL embeddings")
    p.add_argument("--keys", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalize", action="store_true")

    p = sub.add_parser("search", help="top-k retrieval")
    _add_common(p)
    p.add_argument("--query",
                   required=True,
                   help="JSONL embeddings or an encrypt-query file")
    p.add_argument("--query-id", help="which query of the file to use")
    p.add_argument("--db", required=True)
    p.add_argument("--keys")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--kind", choices=["plain", "blocked", "weighted"])
    p.add_argument("--weights",
                   help="preset name, label=w pairs or k comma separated "
                   "weights")
    p.add_argument("--explain",
                   action="store_true",
                   help="report per-block scores")
    p.add_argument("--plaintext-oracle",
                   action="store_true",
                   help="rank in the clear even if --keys is given")
    p.add_argument("--out", help="write the JSON result here")

    p = sub.add_parser("bench", help="timing benchmark")
    _add_common(p)
    p.add_argument("--dims",
                   default=",".join(str(d) for d in config.BENCH_DIMS))
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--reps", type=int, default=config.BENCH_REPS)
    p.add_argument("--warmup", type=int, default=config.BENCH_WARMUP)
    p.add_argument("--setup-reps", type=int, default=5)
    p.add_argument("--bits", type=int, default=config.KEY_BITS)
    p.add_argument("--settings",
                   default="encrypted_query,encrypted_db,plaintext")
    p.add_argument("--out", help="CSV path (default bench.csv)")

    p = sub.add_parser("attack", help="inference attack demonstrations")
    _add_common(p)
    _add_layout(p)
    p.add_argument("which", choices=["pattern", "creator"])
    p.add_argument("--keys", help="use this key pair instead of a fresh one")
    p.add_argument("--bits", type=int, default=config.KEY_BITS)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--block", default="melody")
    p.add_argument("--strength", type=float, default=2.5)
    p.add_argument("--planted-fraction", type=float, default=0.2)
    p.add_argument("--noise-scale", type=float, default=0.5)
    p.add_argument("--query-noise", type=float, default=0.0)
    p.add_argument("--artists", type=int, default=4)
    p.add_argument("--spread", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("serve", help="serve a plaintext database over HTTP")
    _add_common(p)
    p.add_argument("--db", required=True)
    p.add_argument("--bind", default="127.0.0.1:8000")

    return parser


COMMANDS = {
    "keygen": cmd_keygen,
    "encrypt-db": cmd_encrypt_db,
    "encrypt-query": cmd_encrypt_query,
    "search": cmd_search,
    "bench": cmd_bench,
    "attack": cmd_attack,
    "serve": cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG)
    if args.command == "attack" and args.which == "creator" and \
            args.artists < 2:
        parser.error("creator attribution needs --artists of at least 2")
    if args.command in ("encrypt-db", "encrypt-query") and args.dim is None:
        parser.error(f"{args.command} needs --dim")
    if args.command == "attack" and args.dim is None:
        args.dim = 128

    try:
        cfg = CliConfig.from_args(args)
        return COMMANDS[args.command](args, cfg)
    except (AHESimException, OSError) as e:
        code = exit_code(e)
        print(f"ahesim {args.command}: error: {e}", file=sys.stderr)
        if isinstance(e, BudgetError) and e.max_safe_dimension is not None:
            print(f"largest safe dimension: {e.max_safe_dimension}",
                  file=sys.stderr)
        return code


def run():
    sys.exit(main())
