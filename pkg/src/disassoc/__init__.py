"""Disassociation: k^m-anonymous publication of set-valued records."""
from .anonymize import anonymize, anonymize_clusters
from .core import Dataset, Params, TermDictionary, generate_synthetic, parse_dataset, serialize_dataset
from .model import DisassociatedDataset, from_json, to_json
from .reconstruct import Reconstructor, reconstruct
from .verify import audit, brute_force_guarantee

__all__ = [
    "Dataset", "DisassociatedDataset", "Params", "Reconstructor", "TermDictionary",
    "anonymize", "anonymize_clusters", "audit", "brute_force_guarantee",
    "from_json", "generate_synthetic", "parse_dataset", "reconstruct",
    "serialize_dataset", "to_json",
]
