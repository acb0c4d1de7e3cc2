import json
import os
import shutil

import pytest

from rigidcert.pipeline import Pipeline, PipelineConfig, run_pipeline


@pytest.fixture(scope="session")
def run(tmp_path_factory):
    """One full pipeline run shared by the slow tests."""
    ck = tmp_path_factory.mktemp("run") / "checkpoints"
    seed = os.environ.get("RIGIDCERT_SEED_CHECKPOINTS")
    if seed:
        # resume from an earlier run; a stale or foreign stage is recomputed
        shutil.copytree(seed, ck)
    cfg = PipelineConfig(checkpoint_dir=ck)
    cert = run_pipeline(cfg)
    return cfg, cert, Pipeline(cfg)


@pytest.fixture(scope="session")
def minors(run):
    return run[2].minors()


@pytest.fixture(scope="session")
def certificate_bytes(run):
    return (run[0].checkpoint_dir / "certificate.json").read_bytes()


@pytest.fixture
def checkpoint_copy(run, tmp_path):
    """A private copy of the session checkpoints for runs that change config."""
    dst = tmp_path / "ck"
    shutil.copytree(run[0].checkpoint_dir, dst)
    return dst


def load_json(path):
    return json.loads(path.read_text())
