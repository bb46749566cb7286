"""The fake `unreal` module: exactly the API subset scene scripts may use.

Supported surface: asset loading by path (checked against a manifest), actor
spawning from a loaded asset at a location/rotation, per-actor uniform scale,
actor attachment with a mandatory AttachmentRule constant, and Vector/Rotator
value constructors. Touching anything else raises ApiMisuseError, so
"executes cleanly against the mock" is a meaningful claim about a script.

Each execution gets a freshly built module bound to its own recorder; nothing
is shared between runs.
"""

from __future__ import annotations

import types
from dataclasses import dataclass, field


class MockApiError(Exception):
    """Base class for everything the mock raises on purpose."""


class UnknownAssetError(MockApiError):
    """Asset path absent from the manifest."""


class ApiMisuseError(MockApiError):
    """Call outside the supported surface or with wrong argument kinds."""


@dataclass
class ActorRecord:
    asset_path: str
    location: tuple[float, float, float]
    yaw_deg: float
    scale: float = 1.0


@dataclass
class Recorder:
    actors: list[ActorRecord] = field(default_factory=list)
    load_calls: list[str] = field(default_factory=list)
    api_errors: list[dict] = field(default_factory=list)


class _StrictModule(types.ModuleType):
    """Module whose unknown attributes raise instead of returning None."""

    def __getattr__(self, name):
        raise ApiMisuseError(f"unreal.{name} is not part of the supported scripting surface")


def build_unreal_module(recorder: Recorder, manifest: frozenset[str]) -> types.ModuleType:
    class Vector:
        def __init__(self, x=0.0, y=0.0, z=0.0):
            self.x, self.y, self.z = float(x), float(y), float(z)

        def __repr__(self):
            return f"Vector({self.x}, {self.y}, {self.z})"

    class Rotator:
        def __init__(self, pitch=0.0, yaw=0.0, roll=0.0):
            self.pitch, self.yaw, self.roll = float(pitch), float(yaw), float(roll)

        def __repr__(self):
            return f"Rotator(pitch={self.pitch}, yaw={self.yaw}, roll={self.roll})"

    class _AttachmentRuleValue:
        def __init__(self, name):
            self.name = name

        def __repr__(self):
            return f"AttachmentRule.{self.name}"

    class AttachmentRule:
        KEEP_RELATIVE = _AttachmentRuleValue("KEEP_RELATIVE")
        KEEP_WORLD = _AttachmentRuleValue("KEEP_WORLD")
        SNAP_TO_TARGET = _AttachmentRuleValue("SNAP_TO_TARGET")

        def __init__(self):
            raise ApiMisuseError("AttachmentRule is a constants holder; use its class attributes")

    class Asset:
        def __init__(self, path):
            self.path = path

        def __repr__(self):
            return f"Asset({self.path!r})"

    class Actor:
        def __init__(self, record: ActorRecord):
            self._record = record

        def set_actor_scale3d(self, scale_vector):
            if not isinstance(scale_vector, Vector):
                raise ApiMisuseError("set_actor_scale3d takes an unreal.Vector")
            if not (scale_vector.x == scale_vector.y == scale_vector.z):
                raise ApiMisuseError(
                    f"non-uniform scale ({scale_vector.x}, {scale_vector.y}, {scale_vector.z}) "
                    "is not supported"
                )
            self._record.scale = scale_vector.x

        def attach_to_actor(self, parent, socket_name, rule=None):
            if not isinstance(parent, Actor):
                raise ApiMisuseError("attach_to_actor parent must be an actor")
            if not isinstance(rule, _AttachmentRuleValue):
                raise ApiMisuseError("attach_to_actor requires an AttachmentRule constant")

        def __repr__(self):
            return f"Actor({self._record.asset_path!r})"

    class EditorAssetLibrary:
        def __init__(self):
            raise ApiMisuseError("EditorAssetLibrary is a singleton; call its class methods")

        @classmethod
        def load_asset(cls, path):
            if not isinstance(path, str):
                raise ApiMisuseError("load_asset takes a path string")
            recorder.load_calls.append(path)
            if path not in manifest:
                raise UnknownAssetError(f"asset {path!r} does not exist in the content manifest")
            return Asset(path)

    class EditorLevelLibrary:
        def __init__(self):
            raise ApiMisuseError("EditorLevelLibrary is a singleton; call its class methods")

        @classmethod
        def spawn_actor_from_object(cls, asset, location, rotation=None):
            if not isinstance(asset, Asset):
                raise ApiMisuseError(
                    "spawn_actor_from_object takes a loaded asset, got "
                    f"{type(asset).__name__}"
                )
            if not isinstance(location, Vector):
                raise ApiMisuseError("spawn location must be an unreal.Vector")
            if rotation is not None and not isinstance(rotation, Rotator):
                raise ApiMisuseError("spawn rotation must be an unreal.Rotator")
            record = ActorRecord(
                asset_path=asset.path,
                location=(location.x, location.y, location.z),
                yaw_deg=rotation.yaw if rotation is not None else 0.0,
            )
            recorder.actors.append(record)
            return Actor(record)

    module = _StrictModule("unreal")
    module.Vector = Vector
    module.Rotator = Rotator
    module.AttachmentRule = AttachmentRule
    module.EditorAssetLibrary = EditorAssetLibrary
    module.EditorLevelLibrary = EditorLevelLibrary
    return module
