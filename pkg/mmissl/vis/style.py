import matplotlib.colors as mcolors

COLORS = {
    "total": "black",
    "align": "teal",
    "z": "darkorange",
    "zp": "darkolivegreen",
}

LINESTYLES = {"lmin": "--", "lmax": "-"}


def term_color(term, rgb=False):
    """
    Color for a loss term or a column derived from it
    (e.g. `loss_align`, `lmax_zp`).

    Parameters
    ------------
    term : :class:`str`
        Term name or metrics column.

    Returns
    --------
    :class:`str` | :class:`tuple`
    """
    c = COLORS.get(term.split("_", 1)[-1], "0.5")
    if rgb:
        c = mcolors.to_rgb(c)
    return c


def extreme_linestyle(column):
    """Dashed for tracked minima, solid for maxima."""
    return LINESTYLES.get(column.split("_", 1)[0], ":")
