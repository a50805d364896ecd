"""Denoising walkthrough: MAP restoration versus the mean-field variant.

Builds the synthetic test scene (flat regions, a step edge, a texture
patch), corrupts it with Gaussian noise, and restores it twice with the
same gamma latent-scale prior: once by plain EM (equivalently, lagged
diffusivity) and once by the variance-corrected mean-field iteration.

The mean-field path evaluates the edge-stopping function at the gradient
magnitude *plus* a per-pixel variance estimate, which keeps the diffusivity
lower in uncertain areas; in practice it preserves texture and soft edges
that the MAP estimate flattens.  Compare the two edge maps this script
writes: the MAP one is nearly binary, the mean-field one has soft values in
the textured patch.

Run:  python3 demos/denoise_map_vs_mean_field.py
"""

import pathlib

import numpy as np

from gsmrestore import (
    GammaPrior,
    IdentityOperator,
    RestoreConfig,
    add_noise,
    em_restore,
    export_edge_map,
    make_test_image,
    mean_field_restore,
    psnr,
    save_image,
)

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

clean = make_test_image(96)
noisy = add_noise(clean, sigma=0.1, seed=7)
print(f"input: 96x96 synthetic scene, noise sigma 0.1 -> {psnr(noisy, clean):.2f} dB")

config = RestoreConfig(
    prior=GammaPrior(lam=1e3, C=1e3),
    forward=IdentityOperator(),
    sigma=0.1,
    max_outer_iters=60,
)

map_result = em_restore(config, noisy)
print(
    f"MAP (EM): {map_result.iterations} outer iterations, "
    f"objective {map_result.objective_trace[0]:.1f} -> {map_result.objective_trace[-1]:.1f}, "
    f"{psnr(map_result.image, clean):.2f} dB"
)

mf_result = mean_field_restore(config, noisy)
print(
    f"mean field: {mf_result.iterations} outer iterations, "
    f"{psnr(mf_result.image, clean):.2f} dB"
)
softness = np.mean((mf_result.diffusivity > 10) & (mf_result.diffusivity < 990))
print(f"fraction of pixels with intermediate diffusivity (mean field): {softness:.1%}")

save_image(np.clip(noisy, 0, 1), out_dir / "noisy.png")
save_image(map_result.image, out_dir / "denoised_map.png")
save_image(mf_result.image, out_dir / "denoised_mean_field.png")
export_edge_map(map_result.diffusivity, out_dir / "edges_map.png")
export_edge_map(mf_result.diffusivity, out_dir / "edges_mean_field.png")
print(f"wrote images to {out_dir}/")
