"""8-bit image files: PNG (gray / RGB) and binary PGM/PPM.

The PNG side is a deliberately small codec on top of stdlib zlib: bit depth
8, color types gray and RGB, no interlacing, no alpha, no palette.  Reading
understands all five scanline filters so externally produced files load
fine; writing always uses filter 0 with a fixed compression level, so
identical pixel data produces identical bytes.

Loaded images come back as planar float arrays (channels, h, w) with
samples mapped to [0, 1] by s/255; saving clamps to [0, 1] and rounds to
the nearest 8-bit value, making load -> save an exact fixed point of the
quantization.
"""

import struct
import zlib

import numpy as np

_PNG_SIG = b"\x89PNG\r\n\x1a\n"


def _png_chunk(tag, data):
    return (
        struct.pack(">I", len(data))
        + tag
        + data
        + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
    )


def _write_png(path, samples):
    """samples: uint8 array (h, w) for gray or (h, w, 3) for RGB."""
    h, w = samples.shape[:2]
    color_type = 0 if samples.ndim == 2 else 2
    raw = bytearray()
    for row in samples.reshape(h, -1):
        raw.append(0)  # filter type None
        raw.extend(row.tobytes())
    ihdr = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 0)
    with open(path, "wb") as f:
        f.write(_PNG_SIG)
        f.write(_png_chunk(b"IHDR", ihdr))
        f.write(_png_chunk(b"IDAT", zlib.compress(bytes(raw), 9)))
        f.write(_png_chunk(b"IEND", b""))


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter(filtered, h, w, channels):
    stride = w * channels
    bpp = channels
    out = np.zeros((h, stride), dtype=np.uint8)
    pos = 0
    for row in range(h):
        ftype = filtered[pos]
        pos += 1
        cur = bytearray(filtered[pos:pos + stride])
        pos += stride
        prev = out[row - 1] if row else np.zeros(stride, dtype=np.uint8)
        if ftype == 0:
            pass
        elif ftype == 1:  # Sub
            for i in range(bpp, stride):
                cur[i] = (cur[i] + cur[i - bpp]) & 0xFF
        elif ftype == 2:  # Up
            cur = bytearray((np.frombuffer(bytes(cur), np.uint8) + prev).astype(np.uint8).tobytes())
        elif ftype == 3:  # Average
            for i in range(stride):
                left = cur[i - bpp] if i >= bpp else 0
                cur[i] = (cur[i] + (left + int(prev[i])) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(stride):
                left = cur[i - bpp] if i >= bpp else 0
                upleft = int(prev[i - bpp]) if i >= bpp else 0
                cur[i] = (cur[i] + _paeth(left, int(prev[i]), upleft)) & 0xFF
        else:
            raise ValueError(f"unknown PNG filter type {ftype}")
        out[row] = np.frombuffer(bytes(cur), np.uint8)
    return out


def _read_png(data):
    if data[:8] != _PNG_SIG:
        raise ValueError("not a PNG file")
    pos = 8
    width = height = None
    color_type = None
    idat = bytearray()
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        tag = data[pos + 4:pos + 8]
        chunk = data[pos + 8:pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            width, height, depth, color_type, _, _, interlace = struct.unpack(
                ">IIBBBBB", chunk
            )
            if depth != 8:
                raise ValueError(f"unsupported PNG bit depth {depth} (only 8)")
            if color_type not in (0, 2):
                raise ValueError(
                    f"unsupported PNG color type {color_type} (only gray and RGB)"
                )
            if interlace != 0:
                raise ValueError("interlaced PNG is not supported")
        elif tag == b"IDAT":
            idat.extend(chunk)
        elif tag == b"IEND":
            break
    if width is None:
        raise ValueError("PNG has no IHDR chunk")
    channels = 1 if color_type == 0 else 3
    raw = zlib.decompress(bytes(idat))
    expected = height * (width * channels + 1)
    if len(raw) != expected:
        raise ValueError("PNG pixel data has unexpected length")
    flat = _unfilter(raw, height, width, channels)
    if channels == 1:
        return flat.reshape(height, width)
    return flat.reshape(height, width, 3)


def _write_pnm(path, samples):
    h, w = samples.shape[:2]
    magic = b"P5" if samples.ndim == 2 else b"P6"
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n255\n" % (w, h))
        f.write(samples.tobytes())


def _read_pnm(data):
    if data[:2] not in (b"P5", b"P6"):
        raise ValueError("not a binary PGM/PPM file")
    channels = 1 if data[:2] == b"P5" else 3
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise ValueError(f"unsupported PNM bit depth (maxval {maxval}, only 255)")
    samples = np.frombuffer(data[pos:pos + h * w * channels], dtype=np.uint8)
    if samples.size != h * w * channels:
        raise ValueError("PNM pixel data has unexpected length")
    if channels == 1:
        return samples.reshape(h, w)
    return samples.reshape(h, w, 3)


def load_image(path):
    """Load a PNG or binary PGM/PPM as float (channels, h, w) in [0, 1]."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:8] == _PNG_SIG:
        samples = _read_png(data)
    elif data[:2] in (b"P5", b"P6"):
        samples = _read_pnm(data)
    else:
        raise ValueError(f"{path}: not a PNG or binary PGM/PPM file")
    if samples.ndim == 2:
        planar = samples[None, :, :]
    else:
        planar = np.moveaxis(samples, -1, 0)  # interleaved rows -> planar channels
    return planar.astype(float) / 255.0


def quantize(u):
    """Clamp to [0, 1] and round to 8-bit samples."""
    u = np.asarray(u, dtype=float)
    return np.round(np.clip(u, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(u, path):
    """Save a (h, w), (1, h, w) or (3, h, w) image; format from the suffix.

    .png takes gray or RGB, .pgm gray only, .ppm RGB only.  Values are
    clamped to [0, 1] at this point and nowhere else.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 2:
        u = u[None]
    if u.ndim != 3 or u.shape[0] not in (1, 3):
        raise ValueError(f"cannot save image of shape {u.shape}; need 1 or 3 channels")
    samples = quantize(u)
    samples = samples[0] if samples.shape[0] == 1 else np.moveaxis(samples, 0, -1)
    suffix = str(path).lower().rsplit(".", 1)[-1]
    if suffix == "png":
        _write_png(path, samples)
    elif suffix == "pgm":
        if samples.ndim != 2:
            raise ValueError("PGM stores a single channel; got 3")
        _write_pnm(path, samples)
    elif suffix == "ppm":
        if samples.ndim != 3:
            raise ValueError("PPM stores 3 channels; got 1")
        _write_pnm(path, samples)
    else:
        raise ValueError(f"unsupported image suffix .{suffix} (png, pgm, ppm)")
