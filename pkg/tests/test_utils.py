# © 2020 initOS GmbH
# License LGPL-3.0 or later (https://www.gnu.org/licenses/lgpl.html)

import json
import math
import os
import tempfile
from unittest import mock

import numpy as np
import pytest

from fisher_lab import utils


def test_hashhex():
    result = "5eb63bbbe01eeed093cb22bb8f5acdc3"
    assert utils.hexhash("hello world") == result
    assert utils.hexhash(b"hello world") == result


def test_json_encoder():
    data = {
        "vector": np.array([1.0, 2.5]),
        "int": np.int64(3),
        "float": np.float64(0.5),
        "flag": np.bool_(True),
        "tuple": (1, 2),
    }
    assert json.loads(utils.dumps(data)) == {
        "vector": [1.0, 2.5],
        "int": 3,
        "float": 0.5,
        "flag": True,
        "tuple": [1, 2],
    }

    with pytest.raises(TypeError):
        utils.dumps({"x": object()})


def test_dumps_stable():
    a = utils.dumps({"b": 1, "a": 2}, sort_keys=True)
    b = utils.dumps({"a": 2, "b": 1}, sort_keys=True)
    assert a == b


def test_geometric_mean():
    assert utils.geometric_mean([]) == 0
    assert utils.geometric_mean([1, 0, 4]) == 0
    assert utils.geometric_mean([2, 8]) == pytest.approx(4)
    assert utils.geometric_mean(iter([3, 3, 3])) == pytest.approx(3)
    assert utils.geometric_mean([1e-200, 1e200]) == pytest.approx(1)


def test_settings():
    settings = utils.Settings(None)
    assert settings.opt("solver.gap_tol") is None

    with tempfile.NamedTemporaryFile("w+", suffix=".cfg") as cfg:
        cfg.write("[solver]\ngap_tol=1e-6\nmax_iters=\n[harness]\njobs=3\n")
        cfg.seek(0)

        settings = utils.Settings(cfg.name)
        assert settings.opt("solver.gap_tol") == "1e-6"
        assert settings.opt("solver.max_iters") is None
        assert settings.opt("solver.max_iters", 7) == 7
        assert settings.opt("harness.jobs") == "3"

        settings.set_opt("solver.max_iters", "10")
        assert settings.opt("solver.max_iters") == "10"


def test_settings_missing_file():
    settings = utils.Settings("tests/files/does_not_exist.cfg")
    assert settings.config == {}


def test_default_jobs():
    settings = utils.Settings("tests/files/fisher_lab.cfg")

    with mock.patch.dict(os.environ, {"FISHER_LAB_THREADS": "5"}):
        assert utils.default_jobs(settings) == 5

    with mock.patch.dict(os.environ, {"FISHER_LAB_THREADS": ""}):
        assert utils.default_jobs(settings) == 2

    with mock.patch.dict(os.environ, {"FISHER_LAB_THREADS": "abc"}), mock.patch(
        "os.cpu_count", return_value=3
    ):
        assert utils.default_jobs(settings) == 3

    with mock.patch.dict(os.environ, {"FISHER_LAB_THREADS": "0"}), mock.patch(
        "os.cpu_count", return_value=7
    ):
        assert utils.default_jobs() == 7

    with mock.patch.dict(os.environ, {"FISHER_LAB_THREADS": "0"}), mock.patch(
        "os.cpu_count", return_value=None
    ):
        assert utils.default_jobs() == 1


def test_geometric_mean_matches_log_space():
    values = [0.5, 2.0, 8.0]
    expected = math.exp(sum(math.log(v) for v in values) / 3)
    assert utils.geometric_mean(values) == pytest.approx(expected, rel=1e-12)
