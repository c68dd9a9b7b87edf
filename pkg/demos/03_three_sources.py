# # Three simultaneous sources
#
# Three noise sources at 2 m. After the SRP map is built, peaks are picked
# greedily and anything within 20 degrees of an accepted peak is dropped.

# %%
from cubessl.geometry import cubical_array
from cubessl.pipeline import LocalizerConfig, localize
from cubessl.scene import SceneConfig, SourceSpec, noise_rms_for_snr, synthesize
from cubessl.srp_grid import DoaEstimate, angular_distance

array = cubical_array()
truth = [(-135, 35), (90, 75), (145, 60)]
scene = SceneConfig(
    tuple(SourceSpec(az, el, 2.0, 0.1) for az, el in truth),
    noise_rms_for_snr(0.1, 2.0, 20),
    duration=1.0,
    seed=21,
)
result = localize(synthesize(scene, array), LocalizerConfig(array=array))

# %%
for est in result.estimates:
    d = [angular_distance(est, DoaEstimate(az, el)) for az, el in truth]
    k = min(range(3), key=d.__getitem__)
    print(f"({est.azimuth:6.1f}, {est.elevation:5.1f})  power {est.power:.3f}  nearest {truth[k]}  off by {d[k]:.2f} deg")

# %% [markdown]
# Two of the sources are only about 24 degrees apart, so a larger
# suppression radius would merge them.

# %%
wide = localize(synthesize(scene, array), LocalizerConfig(array=array, suppression_radius=30))
print([(e.azimuth, e.elevation) for e in wide.estimates])
