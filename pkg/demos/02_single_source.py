# # Localizing one source with the cube array
#
# Eight microphones on the corners of a 15 cm cube, a noise source 1.5 m
# away, 20 dB SNR. The SRP map is searched on a 2 degree grid.

# %%
import numpy as np

from cubessl.geometry import cubical_array
from cubessl.pipeline import LocalizerConfig, localize
from cubessl.scene import SceneConfig, SourceSpec, noise_rms_for_snr, synthesize
from cubessl.srp_grid import DoaEstimate, angular_distance

array = cubical_array()
print(array.positions)

# %%
loc = LocalizerConfig(array=array, dump_srp=True)
for az, el in [(180, -90), (45, -45), (0, 0), (-45, 45), (-90, 90)]:
    scene = SceneConfig((SourceSpec(az, el, 1.5, 0.1),), noise_rms_for_snr(0.1, 1.5, 20), 0.5)
    result = localize(synthesize(scene, array), loc)
    top = result.estimates[0]
    err = angular_distance(top, DoaEstimate(az, el))
    print(f"true ({az:4d}, {el:4d})  est ({top.azimuth:6.1f}, {top.elevation:5.1f})  error {err:4.2f} deg  {result.elapsed:.3f} s")

# %% [markdown]
# The map itself: how peaked is it? The second line shows the strongest
# value further than 20 degrees from the top estimate.

# %%
grid = loc.grid()
p = result.srp_map.power
far = [angular_distance(top, DoaEstimate(*grid.angles(g))) > 20 for g in range(grid.size)]
print("peak %.3f, best far-away %.3f, median %.3f" % (p.max(), p[np.array(far)].max(), np.median(p)))
