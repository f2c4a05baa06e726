"""Regenerates the committed test fixtures. Requires numpy and Pillow.

Run from this directory: python3 generate.py
"""
import numpy as np
from PIL import Image

rng = np.random.default_rng(20240601)


def save_png(path, array, mode):
    Image.fromarray(array, mode=mode).save(path)


# ---- NPY reference files written by numpy itself ---------------------------
np.save("npy/ref_f8_2x3.npy", (np.arange(6, dtype="<f8").reshape(2, 3) / 4.0))
np.save("npy/ref_f8_single.npy", np.array([1.5], dtype="<f8"))
np.save("npy/ref_f8_3d.npy", (np.arange(24, dtype="<f8").reshape(2, 3, 4) - 11.5))
np.save("npy/ref_f4_3d.npy", (np.arange(24, dtype="<f4").reshape(2, 3, 4) / 8.0))
np.save("npy/fortran.npy", np.asfortranarray(np.arange(6, dtype="<f8").reshape(2, 3)))
np.save("npy/int32.npy", np.arange(4, dtype="<i4"))
np.save("npy/big_endian.npy", np.arange(4, dtype=">f8"))
np.save("npy/zero_dim.npy", np.zeros((0, 3), dtype="<f8"))
np.save("npy/four_d.npy", np.zeros((1, 1, 1, 2), dtype="<f8"))

# ---- images and masks -------------------------------------------------------
rgba = np.array([[[255, 0, 0, 255], [0, 255, 0, 128]],
                 [[0, 0, 255, 0], [255, 255, 255, 255]]], dtype=np.uint8)
save_png("images/rgba_2x2.png", rgba, "RGBA")
Image.fromarray(np.array([[0, 64], [128, 255]], dtype=np.uint8), mode="L").save("images/gray_2x2.png")
Image.fromarray(np.array([[0, 64], [128, 255]], dtype=np.uint8), mode="L").save("images/gray_2x2.pgm")
Image.fromarray(np.array([[[0, 128, 255]]], dtype=np.uint8), mode="RGB").save("images/pixel.ppm")
Image.fromarray(np.array([[0, 65535]], dtype=np.uint16)).save("images/gray16.png")

# VOC-style palette mask: 0 background, 15 person, 255 boundary.
voc = np.zeros((4, 4), dtype=np.uint8)
voc[1:3, 1:3] = 15
voc[0, :] = 255
pal = Image.fromarray(voc, mode="P")
palette = [0] * 768
palette[15 * 3:15 * 3 + 3] = [192, 128, 128]
palette[255 * 3:255 * 3 + 3] = [224, 224, 192]
pal.putpalette(palette)
pal.save("images/voc_mask.png")

# ---- rank-1 tensors w0 (x) M with their spatial maps ------------------------
lines = ["id,tensor,image,mask,p,o,embedding,embedding_masked"]
for i, (c, h, w) in enumerate([(6, 5, 5), (12, 4, 7), (3, 8, 6)]):
    w0 = rng.uniform(0.1, 1.0, size=c)
    m = rng.normal(size=(h, w))
    np.save(f"rank1/m_{i}.npy", m)
    np.save(f"rank1/t_{i}.npy", np.einsum("c,hw->chw", w0, m))
    lines.append(f"r{i},t_{i}.npy,,,,,,")
with open("rank1/manifest.csv", "w") as f:
    f.write("\n".join(lines) + "\n")

# ---- ten-entry dataset ------------------------------------------------------
lines = ["id,tensor,image,mask,p,o,embedding,embedding_masked"]
for i in range(10):
    c, h, w = [(16, 7, 7), (8, 5, 6), (24, 4, 4)][i % 3]
    dtype = "<f4" if i % 2 else "<f8"
    base = rng.normal(size=(c, h, w))
    bump = np.exp(-((np.arange(h)[:, None] - h / 2) ** 2 + (np.arange(w)[None, :] - w / 3) ** 2) / 4)
    t = np.maximum(base + 3 * rng.uniform(0.5, 1.0, size=(c, 1, 1)) * bump, 0).astype(dtype)
    np.save(f"dataset/t{i}.npy", t)
    row = [f"img{i}", f"t{i}.npy"]
    if i < 6:
        img = rng.integers(0, 256, size=(28, 28, 3), dtype=np.uint8)
        save_png(f"dataset/img{i}.png", img, "RGB")
        mask = np.zeros((28, 28), dtype=np.uint8)
        mask[8:20, 4:16] = 1 + i
        mask[0, :] = 255
        Image.fromarray(mask, mode="L").save(f"dataset/mask{i}.png")
        row += [f"img{i}.png", f"mask{i}.png"]
    else:
        row += ["", ""]
    p = round(float(rng.uniform(0.3, 1.0)), 4)
    o = round(float(rng.uniform(0.0, 1.0)), 4)
    row += [repr(p), repr(o)]
    z = rng.normal(size=16)
    np.save(f"dataset/z{i}.npy", z)
    np.save(f"dataset/zm{i}.npy", z + 0.1 * rng.normal(size=16))
    row += [f"z{i}.npy", f"zm{i}.npy"]
    lines.append(",".join(row))
with open("dataset/manifest.csv", "w") as f:
    f.write("\n".join(lines) + "\n")
