""" Open-interval set algebra for band gaps and regions.

    Intervals are open: (lo, hi) excludes both endpoints. Two intervals
    that only touch at an endpoint stay separate, and set operations
    drop results of zero width.
"""

###########
# Imports #
###########
# Third party
import numpy as np


###############
# IntervalSet #
###############
class IntervalSet:
    """ Sorted, disjoint collection of open intervals. """

    def __init__(self, intervals=None):
        self._intervals = []
        if intervals:
            for item in intervals:
                self.add(item)


    def __repr__(self):
        return f"IntervalSet({self.intervals})"


    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.intervals == other.intervals


    def __len__(self):
        return len(self.intervals)


    def __iter__(self):
        return iter(self.intervals)


    def empty(self):
        """ Return True if the set holds no interval. """
        return len(self._intervals) == 0


    @staticmethod
    def merge_intervals(intervals):
        """ Merge overlapping open intervals. Touching intervals
            (a, b) and (b, c) are not merged since b is in neither.
        """
        ret = []
        start = stop = None
        for lo, hi in sorted(intervals):
            if start is None:
                start, stop = lo, hi
                continue
            if lo >= stop:
                ret.append((start, stop))
                start, stop = lo, hi
            elif hi > stop:
                stop = hi
        if start is not None:
            ret.append((start, stop))
        return ret


    @property
    def intervals(self):
        """ Sorted list of (lo, hi) tuples. """
        return list(self._intervals)


    def add(self, item):
        """ Add an (lo, hi) interval. Empty intervals are ignored. """
        lo, hi = float(item[0]), float(item[1])
        if not hi > lo:
            return
        self._intervals = IntervalSet.merge_intervals(
            self._intervals + [(lo, hi)])


    def contains(self, value):
        """ True if value lies strictly inside one of the intervals. """
        for lo, hi in self._intervals:
            if lo < value < hi:
                return True
        return False


    def measure(self):
        """ Total length of the set. """
        return float(sum(hi - lo for lo, hi in self._intervals))


    def union(self, other):
        """ Return the union of two sets. """
        res = IntervalSet()
        res._intervals = IntervalSet.merge_intervals(
            self._intervals + other._intervals)
        return res


    def intersection(self, other):
        """ Return the intersection of two sets. """
        return IntervalSet._from_endpoints(
            IntervalSet.merge(self._intervals, other._intervals,
                              lambda in_a, in_b: in_a and in_b))


    def difference(self, other):
        """ Return the points of self that are not in other. Endpoints
            of other that fall inside self are dropped, so the result
            stays a set of open intervals.
        """
        return IntervalSet._from_endpoints(
            IntervalSet.merge(self._intervals, other._intervals,
                              lambda in_a, in_b: in_a and not in_b))


    @staticmethod
    def _from_endpoints(pairs):
        res = IntervalSet()
        res._intervals = [(lo, hi) for lo, hi in pairs if hi > lo]
        return res


    @staticmethod
    def merge(a_intervals, b_intervals, op):
        """ Sweep the sorted endpoints of both lists and keep the
            stretches where op(in_a, in_b) holds.
        """
        cuts = sorted(set(
            [v for iv in a_intervals for v in iv] +
            [v for iv in b_intervals for v in iv]))
        res = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (lo + hi)
            in_a = any(a < mid < b for a, b in a_intervals)
            in_b = any(a < mid < b for a, b in b_intervals)
            if not op(in_a, in_b):
                continue
            if res and res[-1][1] == lo:
                # Stretches split only by a cut that belongs to neither
                # operand's boundary inside the result are rejoined
                if IntervalSet._boundary_point(lo, a_intervals, b_intervals, op):
                    res.append((lo, hi))
                else:
                    res[-1] = (res[-1][0], hi)
            else:
                res.append((lo, hi))
        return res


    @staticmethod
    def _boundary_point(x, a_intervals, b_intervals, op):
        """ True if the single point x is excluded from the result. """
        in_a = any(a < x < b for a, b in a_intervals)
        in_b = any(a < x < b for a, b in b_intervals)
        return not op(in_a, in_b)


    def to_list(self, scale=1.0):
        """ Return [[lo, hi], ...] scaled (e.g. 1e-9 for GHz). """
        return [[lo * scale, hi * scale] for lo, hi in self._intervals]


    @classmethod
    def from_list(cls, pairs, scale=1.0):
        """ Build a set from [[lo, hi], ...] scaled back to SI. """
        return cls([(lo * scale, hi * scale) for lo, hi in pairs])


###########
# Helpers #
###########
def grid_scan(intervals, grid):
    """ Boolean mask of grid points strictly inside the interval set. """
    grid = np.asarray(grid, dtype=float)
    mask = np.zeros(grid.shape, dtype=bool)
    for lo, hi in intervals:
        mask |= (grid > lo) & (grid < hi)
    return mask
