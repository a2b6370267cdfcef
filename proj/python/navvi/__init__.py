from ._core import (
    WIRE_VERSION,
    Autopilot,
    CapacityError,
    ContractError,
    NavMesh,
    NavviError,
    Scene,
    SceneParseError,
    SceneValidationError,
    Simulation,
    UnreachableError,
    WireError,
    build_navmesh,
    clock_hour,
    decode_control,
    intensity,
    load_scene,
    parse_scene,
    plan,
    run_headless,
)

__all__ = [
    "WIRE_VERSION",
    "Autopilot",
    "CapacityError",
    "ContractError",
    "NavMesh",
    "NavviError",
    "Scene",
    "SceneParseError",
    "SceneValidationError",
    "Simulation",
    "UnreachableError",
    "WireError",
    "build_navmesh",
    "clock_hour",
    "decode_control",
    "intensity",
    "load_scene",
    "parse_scene",
    "plan",
    "run_headless",
]
