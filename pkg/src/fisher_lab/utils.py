# © 2019 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import hashlib
import json
import logging
import os
from configparser import ConfigParser

import numpy as np

_logger = logging.getLogger(__name__)


class JSONEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, (tuple, set)):
            return list(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        return super().default(o)


def dumps(data, **kwargs):
    """Serialize with a stable layout so that equal data gives equal text"""
    return json.dumps(data, cls=JSONEncoder, **kwargs)


def hexhash(s):
    """Generates a hash and returns it as hex"""
    if not isinstance(s, bytes):
        s = s.encode()
    return hashlib.md5(s).hexdigest()


def geometric_mean(data):
    """Geometric mean computed in log space. Returns 0 if any value is 0"""
    data = np.asarray(list(data), dtype=float)
    if not data.size:
        return 0
    if np.any(data <= 0):
        return 0

    return float(np.exp(np.mean(np.log(data))))


class Settings:
    """Flat view of an INI file: `section.option` -> value"""

    def __init__(self, path="fisher_lab.cfg"):
        self.config = {}
        self.load_config(path)

    def load_config(self, file):
        if not file or not os.path.isfile(file):
            return

        _logger.debug("Reading settings file %s", file)
        cp = ConfigParser()
        cp.read(file)

        for section_name, section in cp.items():
            self.config[section_name] = dict(section)
            for option_name, value in section.items():
                self.config[f"{section_name}.{option_name}"] = value

    def set_opt(self, option, value):
        self.config[option] = value

    def opt(self, name, default=None):
        value = self.config.get(name)
        return default if value in (None, "") else value


def default_jobs(settings=None):
    """Number of parallel replications from the env, the settings or the CPU count"""
    value = os.environ.get("FISHER_LAB_THREADS")
    if not value and settings is not None:
        value = settings.opt("harness.jobs")

    try:
        jobs = int(value) if value else 0
    except ValueError:
        _logger.warning("Ignoring invalid job count %r", value)
        jobs = 0
    return jobs if jobs > 0 else (os.cpu_count() or 1)
