""" Network layout drawings. """

###########
# Imports #
###########
# Third party
import numpy as np
from matplotlib.patches import Polygon

# Custom modules
from views import figures


#############
# Constants #
#############
COLORS = {'resonator': '#636363', 'A': '#e6550d', 'B': '#31a354',
          'C': '#3182bd', 'shield': '#bdbdbd'}


def _colour(name):
    if name.startswith('resonator'):
        return COLORS['resonator']
    if name.startswith('shield'):
        return COLORS['shield']
    return COLORS.get(name.rsplit('_', 1)[-1], 'k')


def layout_plot(outlines, path, shield_centers=None, shield_period=None,
                title=None):
    """ Filled outlines in um.

        outlines: {name: [[x, y], ...]}; strips end in their waveguide
        label ('edge_3_A') and are coloured by it.
    """
    fig, ax = figures.new_figure((6.0, 6.0))
    points = []
    for name in sorted(outlines):
        loop = np.asarray(outlines[name], dtype=float)
        ax.add_patch(Polygon(loop, closed=True, facecolor=_colour(name),
                             edgecolor='k', linewidth=0.3, alpha=0.8))
        points.append(loop)
    if shield_centers is not None and len(shield_centers):
        c = np.asarray(shield_centers, dtype=float)
        h = shield_period
        for x, y in c:
            square = [(x - h / 2, y - h / 2), (x + h / 2, y - h / 2),
                      (x + h / 2, y + h / 2), (x - h / 2, y + h / 2)]
            ax.add_patch(Polygon(square, closed=True,
                                 facecolor=COLORS['shield'],
                                 edgecolor='none', alpha=0.5))
        points.append(c)
    if points:
        allpts = np.vstack(points)
        lo, hi = allpts.min(axis=0), allpts.max(axis=0)
        pad = 0.05 * max(hi - lo)
        ax.set_xlim(lo[0] - pad, hi[0] + pad)
        ax.set_ylim(lo[1] - pad, hi[1] + pad)
    ax.set_aspect('equal')
    ax.set_xlabel("x (um)")
    ax.set_ylabel("y (um)")
    if title:
        ax.set_title(title)
    return figures.save_svg(fig, path)
