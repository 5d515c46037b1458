"""Scratch calibration for the toy overfit run (not part of the package)."""
import itertools
import sys
import time

import numpy as np

from swarmsum.models import desk_config, greedy_decode, param_count
from swarmsum.numcore import RngStream
from swarmsum.optim import OptConfig, make_objective, pso_minimize
from swarmsum.rouge import rouge_n
from swarmsum.vocab import EmbeddingMatrix, PAD_ID, Vocabulary, RESERVED, encode, decode_ids

ENDERS = ["tonight", "today", "tonight", "today", "tonight", "today", "tonight", "today"]
NAMES = ["alice", "bob", "carol", "dave", "erin", "frank", "gina", "hugo"]


def build_task(embed_scale, ffn_width, emb_seed=123):
    arts = [f"{n} says the team won the game {e}"
            for n, e in zip(NAMES, ENDERS)]
    sums = [f"team won the game {e}" for e in ENDERS]
    tokens = sorted({t for s in arts + sums for t in s.split()})
    id_to_token = list(RESERVED) + tokens
    vocab = Vocabulary(token_to_id={t: i for i, t in enumerate(id_to_token)},
                       id_to_token=id_to_token, counts={})
    V = len(vocab)
    cfg = desk_config("transformer", vocab_size=V, ffn_width=ffn_width,
                      src_maxlen=14, tgt_maxlen=8)
    if embed_scale < 0:  # orthogonal variant: one axis per token, cycled
        vals = np.zeros((V, 16))
        for i in range(V):
            vals[i, i % 16] = -embed_scale
            if i >= 16:
                vals[i, (i + 7) % 16] = -embed_scale
    else:
        vals = np.stack([RngStream(emb_seed, 1000 + i).uniform(-embed_scale, embed_scale, 16)
                         for i in range(V)])
    vals[PAD_ID] = 0
    emb = EmbeddingMatrix(values=vals, dim=16)
    batch = [(encode(a.split(), vocab, 14, add_markers=True),
              encode(s.split(), vocab, 9, add_markers=True)) for a, s in zip(arts, sums)]
    return cfg, vocab, emb, batch, sums


def run(seed, embed_scale, bound, ffn_width, show=0):
    cfg, vocab, emb, batch, sums = build_task(embed_scale, ffn_width)
    f = make_objective(cfg, batch, emb)
    opt = OptConfig(population=30, iterations=300, bounds=(-bound, bound), seed=seed)
    t0 = time.time()
    r = pso_minimize(f, opt)
    dt = time.time() - t0
    recalls = []
    decs = []
    for (src, _), ref in zip(batch, sums):
        out = greedy_decode(r.best_point, src, emb, cfg, max_steps=8)
        toks = decode_ids(out, vocab)
        decs.append(" ".join(toks))
        recalls.append(rouge_n(toks, ref.split(), 1).recall)
    ratio = r.best_value / r.initial_best
    print(f"seed={seed} scale={embed_scale} bound={bound} w={ffn_width} arity={f.arity} "
          f"init={r.initial_best:.3f} final={r.best_value:.3f} "
          f"ratio={ratio:.2f} meanR1recall={np.mean(recalls):.3f} {dt:.0f}s", flush=True)
    for d in decs[:show]:
        print("   :", d)
    return ratio, float(np.mean(recalls))


if __name__ == "__main__":
    scale = float(sys.argv[1])
    bound = float(sys.argv[2])
    w = int(sys.argv[3])
    seeds = [int(s) for s in sys.argv[4].split(",")] if len(sys.argv) > 4 else [0, 1, 2]
    for seed in seeds:
        run(seed, scale, bound, w, show=2)
