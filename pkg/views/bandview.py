""" Band diagrams and gap sweeps. """

###########
# Imports #
###########
# Third party
import numpy as np

# Custom modules
from views import figures


#################
# Band Diagrams #
#################
def band_diagram(bs, path, gaps=None, regions=None, title=None):
    """ Bands in GHz against k (normalized to pi/d for 1D runs, path
        parameter for 2D runs). Gaps are shaded; region edges are dashed.
    """
    fig, ax = figures.new_figure()
    if bs.k_samples.ndim == 1:
        kmax = bs.k_samples[-1] if bs.k_samples[-1] > 0 else 1.0
        x = bs.k_samples / kmax
        ax.set_xlabel("Wavevector k (pi/d)")
    else:
        x = bs.path
        ticks = bs.ticks or {}
        if ticks:
            labels = ['Gamma' if t.startswith('G') else t for t in ticks]
            ax.set_xticks(list(ticks.values()))
            ax.set_xticklabels(labels)
        ax.set_xlabel("Wavevector path")
    for j in range(bs.n_bands):
        ax.plot(x, bs.bands[:, j] * 1e-9, color='k', linewidth=1.0)

    if gaps is not None:
        for lo, hi in gaps.gaps:
            ax.axhspan(lo * 1e-9, hi * 1e-9, color=figures.GAP_COLOR,
                       alpha=0.6, linewidth=0)
    if regions is not None:
        for name, intervals in regions.items():
            for lo, hi in intervals:
                for edge in (lo, hi):
                    ax.axhline(edge * 1e-9, **figures.REGION_STYLE)
                ax.text(x[-1], 0.5 * (lo + hi) * 1e-9, name,
                        ha='right', va='center', fontsize=8)

    ax.set_xlim(x[0], x[-1])
    ax.set_ylim(0.0, bs.f_max * 1e-9)
    ax.set_ylabel("Frequency (GHz)")
    if title or bs.label:
        ax.set_title(title or f"Waveguide {bs.label}")
    return figures.save_svg(fig, path)


##############
# Gap Sweeps #
##############
def gap_sweep(frame, path, title=None):
    """ Gap intervals against the swept parameter.

        frame: DataFrame with value_um, gap_index, lo_GHz, hi_GHz
        (one row per gap and step).
    """
    fig, ax = figures.new_figure()
    rows = frame.dropna(subset=['lo_GHz', 'hi_GHz'])
    for index in sorted(rows['gap_index'].unique()):
        sub = rows[rows['gap_index'] == index].sort_values('value_um')
        ax.fill_between(sub['value_um'].to_numpy(),
                        sub['lo_GHz'].to_numpy(), sub['hi_GHz'].to_numpy(),
                        color=figures.GAP_COLOR, alpha=0.6, linewidth=0)
        for col in ('lo_GHz', 'hi_GHz'):
            ax.plot(sub['value_um'], sub[col], color='k', marker='o',
                    markersize=3, linewidth=1.0)
    values = np.unique(frame['value_um'].to_numpy())
    if len(values) > 1:
        ax.set_xlim(values.min(), values.max())
    param = frame['param'].iloc[0] if len(frame) else ''
    ax.set_xlabel(f"{param} (um)")
    ax.set_ylabel("Frequency (GHz)")
    if title:
        ax.set_title(title)
    return figures.save_svg(fig, path)
