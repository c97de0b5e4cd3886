"""Named dataset + architecture combinations used by the experiments and CLI."""

from __future__ import annotations

from golsi import data as D
from golsi.model import Architecture, deep_netpi, preset
from golsi.train import Problem

BCWD_SPLIT = D.SplitSpec(400, 169, shuffle_seed=0)
MNIST_TRAIN = 50000

# Single hidden layer sigmoid network on Iris for the localization study. The
# width and init scale put the full-batch optimum along steepest descent at
# alpha ~ 0.1 so it falls inside a 100 x 0.002 step grid.
IRIS_ARCH = Architecture((4, 1024, 3), "sigmoid", "sigmoid", "bce", 0.3, "IrisNet")


def bcwd(arch_name: str, split: D.SplitSpec = BCWD_SPLIT, path=None) -> Problem:
    raw = D.one_hot_binary(D.load_bcwd(path))
    train, test = D.prepare(raw, split)
    return Problem(preset(arch_name), train, test, f"bcwd-{arch_name.lower()}")


def netpi_deep(hidden_layers: int = 10, split: D.SplitSpec = BCWD_SPLIT, path=None) -> Problem:
    raw = D.one_hot_binary(D.load_bcwd(path))
    train, test = D.prepare(raw, split)
    return Problem(deep_netpi(hidden_layers), train, test, f"netpi-deep{hidden_layers}")


def iris() -> Problem:
    train, test = D.prepare(D.load_iris())
    return Problem(IRIS_ARCH, train, test, "iris")


def mnist(arch_name: str, data_dir=None, train_count: int = MNIST_TRAIN) -> Problem:
    root = data_dir or D.data_dir()
    tr = D.load_mnist_idx(root / "train-images-idx3-ubyte", root / "train-labels-idx1-ubyte")
    te = D.load_mnist_idx(root / "t10k-images-idx3-ubyte", root / "t10k-labels-idx1-ubyte")
    tr = tr.subset(range(min(train_count, tr.M)), "mnist-train")
    tr, stats = D.standardize(tr)
    return Problem(preset(arch_name), tr, stats.apply(te), f"mnist-{arch_name.lower()}")


PROBLEMS = {
    "bcwd-logr": lambda: bcwd("LogR"),
    "bcwd-netpi": lambda: bcwd("NetPI"),
    "bcwd-netpii": lambda: bcwd("NetPII"),
    "netpi-deep10": lambda: netpi_deep(10),
    "mnist-neti": lambda: mnist("NetI"),
    "mnist-netii": lambda: mnist("NetII"),
    "iris": iris,
}


def load(name: str) -> Problem:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory()
