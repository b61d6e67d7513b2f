"""
Test fixtures for FedHAP Simulator tests.
"""

import os
import shutil
import tempfile

import numpy as np

from src.data import Dataset, Split, SyntheticSpec, generate_synthetic
from src.federation import FederationConfig, PartitionScheme
from src.hashing import Discriminator, HashHead
from src.nn import Activation, DenseLayer, Network

# Dataset CSV: d=2, C=3, one sample of every split plus a multi-label row
SAMPLE_CSV = """f0,f1,y0,y1,y2,split
0.5,-1.25,1,0,0,train
0.1,0.2,0,1,0,train
-0.3,0.7,1,1,0,train
1.0,1.0,0,0,1,query
-1.0,0.0,0,1,0,db
0.25,0.75,0,0,1,db
"""

# Ragged row on line 3
SAMPLE_CSV_RAGGED = """f0,f1,y0,y1,split
0.5,-1.25,1,0,train
0.1,0.2,0,train
"""

# Label 2 on line 2
SAMPLE_CSV_BAD_LABEL = """f0,y0,y1,split
0.5,2,0,train
"""

# Smallest config that still exercises every phase
TINY_CONFIG = {
    "clients": 2,
    "rounds": 2,
    "local_epochs": 1,
    "code_bits": 8,
    "batch_size": 16,
    "partition": "iid",
    "hidden_dim": 8,
    "disc_hidden_dim": 8,
    "eval_every": 1,
    "pr_topn": [1, 5],
    "synthetic": {"classes": 3, "dim": 6, "per_class": 20, "sigma": 0.2, "seed": 1},
}


def create_temp_file(content: str, suffix: str = '.txt') -> str:
    """Create a temporary file with given content."""
    fd, path = tempfile.mkstemp(suffix=suffix)
    with os.fdopen(fd, 'w') as f:
        f.write(content)
    return path


def create_temp_dir() -> str:
    return tempfile.mkdtemp(prefix='fedhap_test_')


def cleanup_temp_dir(temp_dir: str):
    """Clean up temporary directory."""
    if os.path.exists(temp_dir):
        shutil.rmtree(temp_dir)


def identity_head(k: int) -> HashHead:
    """Single tanh layer with identity weights: b = tanh(x)."""
    return HashHead(Network([DenseLayer(np.eye(k), np.zeros(k), Activation.TANH)]))


def small_head(in_dim: int = 5, code_bits: int = 4, hidden_dim: int = 6, seed: int = 0) -> HashHead:
    return HashHead.create(in_dim, code_bits, hidden_dim, np.random.default_rng(seed))


def small_disc(code_bits: int = 4, num_classes: int = 3, hidden_dim: int = 5,
               seed: int = 1) -> Discriminator:
    return Discriminator.create(code_bits, num_classes, hidden_dim, np.random.default_rng(seed))


def constant_disc(code_bits: int, num_classes: int, prob: float = 0.5) -> Discriminator:
    """Discriminator that outputs `prob` for every input."""
    logit = np.log(prob / (1.0 - prob))
    net = Network([DenseLayer(np.zeros((1, code_bits + num_classes)), np.array([logit]),
                              Activation.SIGMOID)])
    return Discriminator(net, code_bits)


def one_hot(classes, num_classes: int) -> np.ndarray:
    labels = np.zeros((len(classes), num_classes), dtype=np.int8)
    labels[np.arange(len(classes)), classes] = 1
    return labels


def tiny_dataset(seed: int = 1) -> Dataset:
    """90-sample, 3-class blob dataset."""
    return generate_synthetic(SyntheticSpec(classes=3, dim=6, per_class=30, sigma=0.2, seed=seed))


def benchmark_dataset(seed: int = 0) -> Dataset:
    """Default synthetic benchmark: 6 classes, d=32, 1200 samples with overlapping blobs."""
    return generate_synthetic(SyntheticSpec(classes=6, dim=32, per_class=200, sigma=1.5, seed=seed))


def tiny_federation(**overrides) -> FederationConfig:
    settings = dict(clients=2, rounds=2, local_epochs=1, code_bits=8, batch_size=16,
                    partition=PartitionScheme.IID, hidden_dim=8, disc_hidden_dim=8,
                    eval_every=1, seed=3)
    settings.update(overrides)
    return FederationConfig(**settings)


def labelled_dataset(features, labels, splits) -> Dataset:
    return Dataset(np.asarray(features, dtype=np.float64), np.asarray(labels),
                   [Split(s) for s in splits])
