""" Mode field plots: displacement magnitude over the mesh. """

###########
# Imports #
###########
# Third party
import numpy as np
from matplotlib.tri import Triangulation

# Custom modules
from views import figures


def mode_field(mesh, mode, path, deform=0.0, title=None):
    """ Colour-mapped |u| on the corner triangulation of mesh.

        deform scales the displacement drawn on the node positions as a
        fraction of the largest mesh extent (0 plots the undeformed mesh).
    """
    u = np.asarray(mode.displacement)
    magnitude = np.sqrt(np.sum(np.abs(u) ** 2, axis=1))
    peak = magnitude.max()
    if peak > 0:
        magnitude = magnitude / peak

    xy = mesh.nodes * 1e6
    if deform and peak > 0:
        extent = np.ptp(xy, axis=0).max()
        xy = xy + deform * extent * np.real(u) / peak

    tri = Triangulation(xy[:, 0], xy[:, 1], mesh.elements[:, :3])
    width = np.ptp(xy[:, 0])
    height = max(np.ptp(xy[:, 1]), 1e-12)
    fig, ax = figures.new_figure((6.0, max(2.0, min(6.0, 6.0 * height
                                                     / width))))
    shading = ax.tripcolor(tri, magnitude, shading='gouraud',
                           cmap='viridis', vmin=0.0, vmax=1.0)
    fig.colorbar(shading, ax=ax, label="|u| (normalized)")
    ax.set_aspect('equal')
    ax.set_xlabel("x (um)")
    ax.set_ylabel("y (um)")
    ax.set_title(title or f"{mode.frequency * 1e-9:.6f} GHz")
    return figures.save_svg(fig, path)
