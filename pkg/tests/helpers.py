"""Build catalog objects through the config grammar."""
from heckepairs.catalog import CATALOG
from heckepairs.config import parse_config


def catalog_objects(name):
    """``{declared name: object}`` for one catalog entry."""
    cfg = parse_config(f"use {name}\n")
    return {k: d.obj for k, d in cfg.decls.items()}
