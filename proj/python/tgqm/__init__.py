"""Task-oriented grasp quality engine.

Thin re-export of the compiled ``_tgqm`` module. Metric dicts use the keys
``eps, inertia, effort_impact, effort_hold, discharge, use_force,
use_geometry``; dataset arrays keep the 12-column phi order
``eps, inertia, e_i, e_h[0..5], delta, u_tau, u_g``.
"""

from ._tgqm import (  # noqa: F401
    ConfigError,
    EmptyResult,
    GeometryError,
    IoError,
    Mesh,
    NumericalFailure,
    ObjectLoadError,
    RECORD_SIZE,
    __version__,
    argmax_search,
    builtin_mesh,
    builtin_names,
    depth_to_cloud,
    draw_sample,
    evaluate,
    export_scene,
    generate_dataset,
    load_mesh,
    load_sidecar,
    read_arrays,
    read_grim,
    read_records,
    render_depth,
    save_off,
    score,
    verify_dataset,
    write_grim,
)

PHI_COLUMNS = (
    "eps", "inertia", "e_i",
    "e_h_0", "e_h_1", "e_h_2", "e_h_3", "e_h_4", "e_h_5",
    "delta", "u_tau", "u_g",
)
