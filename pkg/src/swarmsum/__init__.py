"""swarmsum: a desk-scale abstractive-summarization laboratory.

Three architectures (attention seq2seq with coverage, pointer network,
transformer) are trained gradient-free by population metaheuristics
(particle swarm, whale optimization, continuous ant colony), then scored
with exact ROUGE-1/2/L.  Everything is seeded and deterministic.
"""

from . import analyze, corpus, errors, models, numcore, optim, rouge, vocab

__version__ = "0.1.0"

__all__ = ["analyze", "corpus", "errors", "models", "numcore", "optim",
           "rouge", "vocab", "__version__"]
