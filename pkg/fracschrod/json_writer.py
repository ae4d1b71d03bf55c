""" This module contains the functions that write run summaries and manifests to JSON files. """

import json
from pathlib import Path

import numpy as np


def to_plain(value):
    """Convert numpy scalars and arrays to JSON-native types."""
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_plain(item) for item in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_to_json(filename, data):
    """Write data to a JSON file.

    Keys are sorted and no timestamps are added, so identical data gives
    byte-identical files.

    Args:
        filename (str | Path): The path of the JSON file.
        data (dict): The data to write; numpy values are converted.

    Returns:
        Path: the written file
    """
    path = Path(filename)
    path.parent.mkdir(parents=True, exist_ok=True)
    # Example summary written by the solve subcommand:
    # {
    #     "alpha": 2.0,
    #     "potential": "harmonic",
    #     "states": [
    #         {
    #             "accepted": true,
    #             "energy": 0.49999999999999,
    #             "energy_decay": 0.50000000000002,
    #             "index": 0,
    #             "iterations": 1534,
    #             "residual": 3.1e-11,
    #             ...
    #         }
    #     ]
    # }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_plain(data), f, indent=4, sort_keys=True)
        f.write("\n")
    return path


def write_manifest(filename, config, version):
    """Write the run manifest echoing the fully resolved configuration.

    Args:
        filename (str | Path): The path of the manifest file.
        config (RunConfig): The resolved run configuration.
        version (str): The package version that produced the run.

    Returns:
        Path: the written file
    """
    manifest = {
        "subcommand": config.subcommand,
        "version": version,
        "config": config.to_manifest(),
    }
    return write_to_json(filename, manifest)
