"""Shared fixtures: one generated dataset and one trained model bundle.

Everything heavy is session-scoped; the generator and training seeds
match the shipped configs so tests exercise the same frozen pipeline
the command line reproduces.
"""

import warnings

import pytest

from anchortime.datagen import write_student_files
from anchortime.dataset import ingest
from anchortime.workflows import build_model_bundle


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("student-data")
    write_student_files(directory)
    return directory


@pytest.fixture(scope="session")
def data_paths(data_dir):
    return [data_dir / "student-mat.csv", data_dir / "student-por.csv"]


@pytest.fixture(scope="session")
def records(data_paths):
    return ingest(data_paths)


@pytest.fixture(scope="session")
def bundle(data_paths):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_model_bundle(data_paths)
