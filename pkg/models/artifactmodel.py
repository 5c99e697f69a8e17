""" Class to write run artifacts to a timestamped run directory. """

###########
# Imports #
###########
# Standard library
import csv
import json
import os
import threading
import time
from datetime import datetime
from pathlib import Path

# Custom modules
from exceptions.config_exceptions import ArtifactMismatch


#############
# Constants #
#############
SCHEMA_VERSION = 1
MANIFEST_NAME = 'manifest.json'


#########
# MODEL #
#########
class ArtifactModel:
    """ Write CSV, JSON and text artifacts of one run. """
    def __init__(self, command, config, version, **kwargs):
        """ Create datestamp for the run directory name. """
        self.command = command
        self.config = config
        self.version = version
        self.started = time.perf_counter()
        self.files = []
        self._lock = threading.Lock()

        # Generate date stamp
        self.datestamp = datetime.now().strftime("%Y_%b_%d_%H%M%S")

        # Define data directory name
        if 'data_dir_name' in kwargs:
            self.data_directory = Path(kwargs['data_dir_name'])
        else:
            self.data_directory = Path(config.get('output.directory'))

        self.run_directory = self.data_directory / \
            f"{self.command}_{self.datestamp}"


    def _check_for_data_folder(self):
        """ Create the run directory if it doesn't currently exist. """
        if not os.access(self.run_directory, os.F_OK):
            print(f"\nartifactmodel: Creating run directory "
                  f"{self.run_directory}")
            os.makedirs(self.run_directory)


    def _path(self, filename):
        self._check_for_data_folder()
        path = self.run_directory / filename
        self._check_write_access(path)
        return path


    @staticmethod
    def _check_write_access(path):
        """ Check for write access before storing a file. """
        file_exists = os.access(path, os.F_OK)
        parent_writable = os.access(path.parent, os.W_OK)
        file_writable = os.access(path, os.W_OK)
        if (
            (not file_exists and not parent_writable) or
            (file_exists and not file_writable)
        ):
            raise PermissionError(f"artifactmodel: Permission denied "
                                  f"accessing file: {path}")


    def _record(self, path):
        if path.name not in self.files:
            self.files.append(path.name)
        print(f"artifactmodel: Wrote {path.name}")
        return path


    def append_row(self, filename, data):
        """ Append a dict as one CSV row. Write the header only for a
            new file.
        """
        with self._lock:
            path = self._path(filename)
            newfile = not path.exists()
            with open(path, 'a', newline='') as fh:
                csvwriter = csv.DictWriter(fh, fieldnames=list(data.keys()))
                if newfile:
                    csvwriter.writeheader()
                csvwriter.writerow(data)
            return self._record(path)


    def write_frame(self, filename, frame):
        """ Write a pandas DataFrame to CSV. """
        with self._lock:
            path = self._path(filename)
            frame.to_csv(path, index=False, float_format='%.9e')
            return self._record(path)


    def write_json(self, filename, data):
        with self._lock:
            path = self._path(filename)
            with open(path, 'w') as fh:
                json.dump(data, fh, sort_keys=True, indent=2)
                fh.write('\n')
            return self._record(path)


    def write_text(self, filename, text):
        with self._lock:
            path = self._path(filename)
            with open(path, 'w') as fh:
                fh.write(text)
            return self._record(path)


    def reserve(self, filename):
        """ Path for a file written by someone else (plots). """
        with self._lock:
            return self._record(self._path(filename))


    def write_manifest(self, status):
        """ Self-describing record of the run. """
        manifest = {
            'schema_version': SCHEMA_VERSION,
            'command': self.command,
            'tool_version': self.version,
            'config_hash': self.config.config_hash(),
            'config': self.config.to_dict(),
            'files': sorted(self.files),
            'status': status,
            'wall_time_s': round(time.perf_counter() - self.started, 3),
        }
        with self._lock:
            path = self._path(MANIFEST_NAME)
            with open(path, 'w') as fh:
                json.dump(manifest, fh, sort_keys=True, indent=2)
                fh.write('\n')
        print(f"artifactmodel: Run stored in {self.run_directory}")
        return path


def read_manifest(path):
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        with open(path, 'r') as fh:
            manifest = json.load(fh)
    except (FileNotFoundError, json.JSONDecodeError):
        raise ArtifactMismatch('manifest', str(path))
    if manifest.get('schema_version') != SCHEMA_VERSION:
        raise ArtifactMismatch('manifest', str(path))
    return manifest
