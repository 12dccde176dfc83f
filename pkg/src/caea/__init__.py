"""CIM-based ART clustering with edges and ages, plus its divisive hierarchy."""

from caea.bandwidth import BandwidthEstimate, estimate_sigma
from caea.hierarchy import HcaeaNode, HcaeaTree, fit_hierarchy, partition_training_data
from caea.metrics import accuracy, ari, macro_f1, nmi
from caea.model import CaeaModel, CaeaParams, ConfigError, Node, VigilanceCase
from caea.similarity import cim, correntropy, gaussian_kernel

__all__ = [
    "BandwidthEstimate",
    "CaeaModel",
    "CaeaParams",
    "ConfigError",
    "HcaeaNode",
    "HcaeaTree",
    "Node",
    "VigilanceCase",
    "accuracy",
    "ari",
    "cim",
    "correntropy",
    "estimate_sigma",
    "fit_hierarchy",
    "gaussian_kernel",
    "macro_f1",
    "nmi",
    "partition_training_data",
]
