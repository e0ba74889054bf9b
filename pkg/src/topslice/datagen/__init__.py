from .meshes import PrimitiveMesh, build_mesh, sample_surface
from .render import look_at, rasterize
from .scenes import (
    CLASS_CATALOG,
    SUITES,
    SceneObject,
    SceneSpec,
    class_mesh,
    gen_cluttered_scene,
    gen_occluded_scene,
    gen_training_views,
    generate_suite,
    hidden_fractions,
    icosahedron_directions,
    render_scene,
    spec_from_text,
    spec_to_text,
)

__all__ = [
    "PrimitiveMesh",
    "build_mesh",
    "sample_surface",
    "look_at",
    "rasterize",
    "CLASS_CATALOG",
    "SUITES",
    "SceneObject",
    "SceneSpec",
    "class_mesh",
    "gen_cluttered_scene",
    "gen_occluded_scene",
    "gen_training_views",
    "generate_suite",
    "hidden_fractions",
    "icosahedron_directions",
    "render_scene",
    "spec_from_text",
    "spec_to_text",
]
