import datetime
import os
import time

import numpy as np
import pytest

import oica.session as sess
from oica.optimizer import run_quasi_orth


def test_archive_name():
    assert sess.archive_name("run").name == "run.hdf5"
    assert sess.archive_name("run.hdf5").name == "run.hdf5"


def test_save_and_load(tmpdir):
    """

    Test writing a run archive and reading it back

    """

    basis = np.arange(6.0).reshape(3, 2)
    with sess.RunArchive(os.path.join(tmpdir, "test_run")) as run:
        run.save_parameter(seed=3, cost="l4", lam=0.5, floor=None)
        run.save_dataset("basis", basis)
        run.save_dataset("min_angle", np.float64(12.5))
        run.save_variables(a=[0, 1, 2], b=[0, 1, 4])

    with sess.SavedRun(os.path.join(tmpdir, "test_run")) as run:
        assert tuple(run.log_variable_list()) == ("a", "b")
        assert run.has_log("a")
        assert (run["b"] == (0, 1, 4)).all()
        assert (run.log("a") == run["a"]).all()
        assert np.array_equal(run["basis"], basis)
        assert run.dataset("min_angle") == 12.5
        assert sorted(run.dataset_names()) == ["basis", "min_angle"]
        assert run["seed"] == 3
        assert run.parameter("cost") == "l4"
        assert not run.has_parameter("floor")
        assert run.parameters() == {"seed": 3, "cost": "l4", "lam": 0.5}
        with pytest.raises(KeyError):
            run["toto"]
        description = run.describe()
        assert "List of saved variables: (3 lines)" in description
        assert " basis (3×2)" in description
        assert " cost = l4 (str)" in description
        created = run.creation_date()
        assert "Creation date: " + created in description
    age = time.time() - datetime.datetime.fromisoformat(created).timestamp()
    assert 0.0 <= age < 600.0
    assert created.endswith("+00:00")


def test_save_trace(tmpdir):
    _, trace = run_quasi_orth(np.eye(2), 3)
    with sess.RunArchive(os.path.join(tmpdir, "trace.hdf5")) as run:
        run.save_trace(trace)
    with sess.SavedRun(os.path.join(tmpdir, "trace.hdf5")) as run:
        assert len(run["objective"]) == 4
        assert run["termination"] == "MaxIters"
        assert run["rejected_curvature_pairs"] == 0


def test_unequal_variables(tmpdir):
    with sess.RunArchive(os.path.join(tmpdir, "bad")) as run:
        with pytest.raises(ValueError):
            run.save_variables(a=[1, 2], b=[1])


def test_missing_and_foreign_files(tmpdir):
    with pytest.raises(FileNotFoundError):
        with sess.SavedRun(os.path.join(tmpdir, "missing")):
            pass

    import h5py

    with h5py.File(os.path.join(tmpdir, "foreign.hdf5"), "w") as f:
        f.create_dataset("x", data=[1, 2])
    with pytest.raises(RuntimeError):
        with sess.SavedRun(os.path.join(tmpdir, "foreign")):
            pass


def test_closed_archive(tmpdir):
    run = sess.SavedRun(os.path.join(tmpdir, "whatever"))
    with pytest.raises(RuntimeError):
        run.parameters()


def test_verbose_loading(tmpdir, capsys):
    with sess.RunArchive(os.path.join(tmpdir, "verbose")) as run:
        run.save_parameter(seed=0)
    with sess.SavedRun(os.path.join(tmpdir, "verbose"), verbose=True) as run:
        assert run["seed"] == 0
    assert "Creation date" in capsys.readouterr().out
