""" General functions library.

    Unit conversions, planar helpers and hashing
    shared by the models.
"""

###########
# Imports #
###########
# Standard library
import hashlib
import json

# Third party
import numpy as np


#########
# Units #
#########
def um2m(um):
    """ Convert micrometers to meters. Takes a single
        value or a list of values.
    """
    try:
        return [x * 1e-6 for x in um]
    except TypeError:
        return um * 1e-6


def m2um(m):
    """ Convert meters to micrometers. Takes a single
        value or a list of values.
    """
    try:
        return [x * 1e6 for x in m]
    except TypeError:
        return m * 1e6


def ghz2hz(ghz):
    """ Convert GHz to Hz. """
    return ghz * 1e9


##########
# Planar #
##########
def rotation_matrix(theta):
    """ 2x2 counterclockwise rotation by theta radians. """
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate_points(points, theta, origin=(0.0, 0.0)):
    """ Rotate an (N, 2) array of points counterclockwise by
        theta radians about origin.

        Parameters:
            points: (N, 2) array-like of x, y coordinates
            theta: rotation angle in radians
            origin: centre of rotation

        Returns: (N, 2) numpy array
    """
    pts = np.asarray(points, dtype=float)
    origin = np.asarray(origin, dtype=float)
    return (pts - origin) @ rotation_matrix(theta).T + origin


def signed_area(loop):
    """ Shoelace signed area of a closed vertex loop. Positive
        for counterclockwise loops.
    """
    pts = np.asarray(loop, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def unit_vector(angle):
    """ Unit vector at angle radians from +x. """
    return np.array([np.cos(angle), np.sin(angle)])


###########
# Hashing #
###########
def canonical_hash(data):
    """ SHA-256 of a JSON-serializable object written with
        sorted keys and no whitespace.
    """
    text = json.dumps(data, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()
