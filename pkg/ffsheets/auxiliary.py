#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import configparser
import hashlib
import json
import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path

import numpy as np


def get_console_handler():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s:%(levelname)8s:%(name)s - %(message)s")
    handler.setFormatter(formatter)
    return handler


def get_file_handler(filename):
    """
    Default FileHandler
    :param filename: Path of the logfile. An existing file is replaced.
    :return: The handler
    """
    try:
        os.remove(filename)
    except FileNotFoundError:
        pass
    handler = RotatingFileHandler(filename, mode="w", maxBytes=4e5, backupCount=1)
    formatter = logging.Formatter("%(asctime)s:%(levelname)8s:%(name)s - %(message)s")
    handler.setFormatter(formatter)
    return handler


def get_logger(name):
    logger = logging.getLogger(name)
    logger.propagate = True
    return logger


log = get_logger(__name__)

_PACKAGEROOT = Path(os.path.abspath(__file__)).parent

CONFIG = configparser.ConfigParser()
# Set default paths
CONFIG["Paths"] = {"PACKAGEROOT": str(_PACKAGEROOT),
                   "TESTROOT": os.path.join(_PACKAGEROOT, "Test"),
                   "CONFIGROOT": os.path.join(_PACKAGEROOT, "res", "configs")}
# Numerical defaults
CONFIG["Numerics"] = {"nodes": "64",
                      "max_nodes": "512",
                      "refine_tolerance": "1e-9",
                      "condition_limit": "1e12",
                      "standoff_fraction": "1e-3",
                      "endpoint_exclusion": "0.02",
                      "newton_tolerance": "1e-10",
                      "samples_per_side": "16",
                      "residue_points": "64",
                      "tau_factor": "5"}


def get_path(identifier: str) -> str:
    """
    Get the requested path from the package config.
    :param identifier: Path-type identifier.
    :return:
    """
    return CONFIG["Paths"][identifier]


def get_option(key: str, type_=float, section: str = "Numerics"):
    """
    Get a typed option from the package config.

    :param key: Option name.
    :param type_: Callable converting the stored string (float, int, ...).
    :param section: Config section (defaults to the numerical defaults).
    """
    return type_(CONFIG[section][key])


def json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def canonical_json(obj) -> str:
    """Sorted keys, compact separators: the form the config digest is taken of."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=json_default)


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


