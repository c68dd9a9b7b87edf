# # Turning toward a source and driving to it
#
# The vehicle starts facing +x with a source 3 m away on its left. Every
# quarter second it listens for half a second, turns toward the strongest
# direction and, once roughly aligned, drives forward.

# %%
import math

from cubessl.pipeline import LocalizerConfig, TrackParams, track_and_drive
from cubessl.scene import SceneConfig, SourceSpec, noise_rms_for_snr

scene = SceneConfig((SourceSpec(90.0, 0.0, 3.0, 0.1),), noise_rms_for_snr(0.1, 3.0, 20), seed=5)
traj = track_and_drive(scene, LocalizerConfig(), track=TrackParams(duration=10.0))

# %%
print("   t      x      y   heading  measured error   wheels")
for t, x, y, h, err, *w in traj.rows[::4]:
    print(f"{t:5.2f} {x:6.2f} {y:6.2f} {math.degrees(h):8.1f} {math.degrees(err):10.1f}   " + " ".join(f"{v:+.2f}" for v in w))
print("final bearing error %.2f deg, %.2f m left to go" % (math.degrees(traj.bearing_error()), traj.distance_to_target()))

# %% [markdown]
# With a second, quieter source on the other side the vehicle still
# heads for the louder one.

# %%
two = SceneConfig((SourceSpec(90.0, 0.0, 3.0, 0.2), SourceSpec(-90.0, 0.0, 3.0, 0.05)), noise_rms=0.001, seed=2)
end = track_and_drive(two, track=TrackParams(duration=8.0)).final_state
print("ended at x=%.2f y=%.2f" % (end.x, end.y))
