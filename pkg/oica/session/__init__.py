"""Run archives (:mod:`oica.session`)
===================================

A run is saved in a single HDF5 file:

- the run parameters are stored as attributes of the root group;
- the per-iteration series (the optimization trace) are datasets of the
  ``variables`` group, all of the same length;
- arrays (final and initial basis, angles, whitening matrix...) are
  datasets of the ``datasets`` group, whose ``timestamp`` attribute is the
  creation date of the archive.

:class:`RunArchive` writes an archive, :class:`SavedRun` reads it back.

.. autoclass:: RunArchive
   :members:

.. autoclass:: SavedRun
   :members:

"""

import time
from pathlib import Path

import numpy as np
import h5py
from fluiddyn.util.terminal_colors import cprint

from oica.mytime import epoch2datestr

__all__ = ["RunArchive", "SavedRun", "archive_name"]


def archive_name(path):
    """HDF5 file name of an archive: ``.hdf5`` is appended if missing."""
    path = Path(path)
    if path.suffix != ".hdf5":
        path = path.with_name(path.name + ".hdf5")
    return path


class BaseRun:
    def __init__(self, path, verbose=False):
        self.storename = archive_name(path)
        self.run_name = self.storename.stem
        self.verbose = verbose
        self.store = None

    def __str__(self):
        return self.run_name

    @property
    def opened(self):
        return self.store is not None

    def _check_opened(self):
        if not self.opened:
            raise RuntimeError("Run archive {:} is not opened".format(self.run_name))

    def _group(self, name):
        if self.store.mode == "r":
            return self.store.get(name, {})
        return self.store.require_group(name)

    @property
    def grp_variables(self):
        return self._group("variables")

    @property
    def grp_datasets(self):
        return self._group("datasets")

    def has_parameter(self, name):
        self._check_opened()
        return name in self.store.attrs

    def parameter(self, name):
        self._check_opened()
        value = self.store.attrs[name]
        if isinstance(value, np.ndarray) and value.size == 1:
            value = value.item()
        if isinstance(value, bytes):
            value = value.decode()
        return value

    def parameters(self):
        self._check_opened()
        return {name: self.parameter(name) for name in self.store.attrs}

    def has_log(self, name):
        self._check_opened()
        return name in self.grp_variables

    def log_variable_list(self):
        self._check_opened()
        return list(self.grp_variables.keys())

    def log(self, varname):
        self._check_opened()
        return self.grp_variables[varname][()]

    def has_dataset(self, name):
        self._check_opened()
        return name in self.grp_datasets

    def dataset(self, name):
        self._check_opened()
        return self.grp_datasets[name][()]

    def dataset_names(self):
        self._check_opened()
        return list(self.grp_datasets.keys())

    def __getitem__(self, key):
        if self.has_log(key):
            return self.log(key)
        elif self.has_parameter(key):
            return self.parameter(key)
        elif self.has_dataset(key):
            return self.dataset(key)
        else:
            raise KeyError('Unknown key "' + key + '"')

    def creation_date(self):
        """Creation date of the archive (ISO 8601, UTC), or None."""
        self._check_opened()
        if "datasets" not in self.store or "timestamp" not in self.grp_datasets.attrs:
            return None
        return epoch2datestr(float(self.grp_datasets.attrs["timestamp"]))

    def describe(self):
        """Returns a text description of the archive content."""
        self._check_opened()
        lines = []
        created = self.creation_date()
        if created is not None:
            lines.append("Creation date: " + created)
        variables = self.log_variable_list()
        if variables:
            num_lines = len(self.grp_variables[variables[0]])
            lines.append("List of saved variables: ({:d} lines)".format(num_lines))
            lines.extend(" " + var for var in variables)
        datasets = self.dataset_names()
        if datasets:
            lines.append("List of saved datasets:")
            for name in datasets:
                shape = "×".join(str(s) for s in self.grp_datasets[name].shape)
                lines.append(" {:} ({:})".format(name, shape))
        parameters = self.parameters()
        if parameters:
            lines.append("List of saved parameters:")
            for name, value in sorted(parameters.items()):
                lines.append(" {:} = {:} ({:})".format(name, value, type(value).__name__))
        return "\n".join(lines)

    def close(self):
        if self.store is not None:
            self.store.close()
            self.store = None

    def __enter__(self):
        return self

    def __exit__(self, type_, value, cb):
        self.close()


class RunArchive(BaseRun):
    """Writes a run archive. Existing archives are overwritten.

    :param path: archive file name (``.hdf5`` appended if missing)
    :type path: str or :class:`pathlib.Path`
    :param verbose: print the archive activity
    :type verbose: bool, optional
    """

    def __enter__(self):
        self.storename.parent.mkdir(parents=True, exist_ok=True)
        self.store = h5py.File(self.storename, "w")
        self.creation_time = time.time()
        self.grp_datasets.attrs["timestamp"] = self.creation_time
        if self.verbose:
            cprint.yellow("*** Run archive created at " + str(self.storename))
        return super().__enter__()

    def save_parameter(self, **kwargs):
        """Stores scalar or string parameters as root attributes. None values
        are skipped."""
        self._check_opened()
        for name, value in kwargs.items():
            if value is None:
                continue
            if isinstance(value, Path):
                value = str(value)
            self.store.attrs[name] = value

    def save_dataset(self, name, data):
        """Stores an array in the datasets group (gzip compressed)."""
        self._check_opened()
        data = np.asarray(data)
        if name in self.grp_datasets:
            del self.grp_datasets[name]
        if data.ndim == 0:
            self.grp_datasets.create_dataset(name, data=data)
        else:
            self.grp_datasets.create_dataset(
                name, data=data, chunks=True, compression="gzip"
            )
        if self.verbose:
            cprint.yellow("Saving " + name)

    def save_variables(self, **columns):
        """Stores equally long 1D series in the variables group."""
        self._check_opened()
        lengths = {len(c) for c in columns.values()}
        if len(lengths) > 1:
            raise ValueError("Logged variables must have the same length")
        for name, values in columns.items():
            if name in self.grp_variables:
                del self.grp_variables[name]
            self.grp_variables.create_dataset(name, data=np.asarray(values, dtype=float))

    def save_trace(self, trace):
        """Stores an :class:`~oica.optimizer.OptimTrace`: its columns as
        variables, its termination reason as a parameter."""
        self.save_variables(
            objective=trace.objective,
            grad_norm=trace.grad_norm,
            min_angle_deg=trace.min_angle_deg,
        )
        self.save_parameter(
            termination=None if trace.termination is None else trace.termination.value,
            rejected_curvature_pairs=trace.rejected_pairs,
        )


class SavedRun(BaseRun):
    """Reads a run archive.

    :param path: archive file name (``.hdf5`` appended if missing)
    :type path: str or :class:`pathlib.Path`
    :param verbose: print the creation date when opening
    :type verbose: bool, optional
    """

    def __enter__(self):
        if not self.storename.exists():
            raise FileNotFoundError(str(self.storename))
        self.store = h5py.File(self.storename, "r")
        if "datasets" not in self.store and "variables" not in self.store:
            self.close()
            raise RuntimeError(
                "The file '" + str(self.storename) + "' is not an oica run archive."
            )
        if self.verbose:
            print("Loading saved run from file", self.storename)
            created = self.creation_date()
            if created is not None:
                cprint.blue("*** Creation date: " + created)
        return super().__enter__()
