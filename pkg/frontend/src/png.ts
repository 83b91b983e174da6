// Palette-indexed PNG encode/decode for layout export and import.
//
// The encoder writes real PNGs using stored (uncompressed) deflate
// blocks, which every decoder understands; grids are tiny so size does
// not matter. The decoder handles exactly those files (round-tripping
// our own exports in tests); arbitrary PNGs are imported in the browser
// through a canvas instead.

const SIGNATURE = Uint8Array.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

const CRC_TABLE = (() => {
  const t = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    t[n] = c >>> 0;
  }
  return t;
})();

export function crc32(data: Uint8Array): number {
  let c = 0xffffffff;
  for (const b of data) c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

export function adler32(data: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (const byte of data) {
    a = (a + byte) % 65521;
    b = (b + a) % 65521;
  }
  return ((b << 16) | a) >>> 0;
}

function u32be(v: number): Uint8Array {
  return Uint8Array.from([(v >>> 24) & 0xff, (v >>> 16) & 0xff, (v >>> 8) & 0xff, v & 0xff]);
}

function chunk(type: string, body: Uint8Array): Uint8Array {
  const typeBytes = Uint8Array.from([...type].map((c) => c.charCodeAt(0)));
  const payload = new Uint8Array(typeBytes.length + body.length);
  payload.set(typeBytes);
  payload.set(body, typeBytes.length);
  const out = new Uint8Array(8 + payload.length + 4);
  out.set(u32be(body.length), 0);
  out.set(payload, 4);
  out.set(u32be(crc32(payload)), 8 + body.length);
  return out;
}

/** zlib stream made of stored deflate blocks. */
export function zlibStored(raw: Uint8Array): Uint8Array {
  const blocks: Uint8Array[] = [Uint8Array.from([0x78, 0x01])];
  const MAX = 65535;
  for (let off = 0; off < raw.length || off === 0; off += MAX) {
    const part = raw.subarray(off, Math.min(off + MAX, raw.length));
    const last = off + MAX >= raw.length ? 1 : 0;
    const header = Uint8Array.from([
      last,
      part.length & 0xff,
      (part.length >>> 8) & 0xff,
      ~part.length & 0xff,
      (~part.length >>> 8) & 0xff,
    ]);
    blocks.push(header, part);
    if (last) break;
  }
  blocks.push(u32be(adler32(raw)));
  const total = blocks.reduce((n, b) => n + b.length, 0);
  const out = new Uint8Array(total);
  let off = 0;
  for (const b of blocks) {
    out.set(b, off);
    off += b.length;
  }
  return out;
}

export function inflateStored(z: Uint8Array): Uint8Array {
  if (z.length < 6) throw new Error("zlib stream too short");
  if ((z[0] & 0x0f) !== 8) throw new Error("not a deflate stream");
  const parts: Uint8Array[] = [];
  let off = 2;
  for (;;) {
    const header = z[off];
    if ((header & 0x06) !== 0) throw new Error("only stored deflate blocks supported");
    const len = z[off + 1] | (z[off + 2] << 8);
    parts.push(z.subarray(off + 5, off + 5 + len));
    off += 5 + len;
    if (header & 1) break;
  }
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let o = 0;
  for (const p of parts) {
    out.set(p, o);
    o += p.length;
  }
  if (adler32(out) !== ((z[off] << 24) | (z[off + 1] << 16) | (z[off + 2] << 8) | z[off + 3]) >>> 0) {
    throw new Error("zlib checksum mismatch");
  }
  return out;
}

export type Rgb = [number, number, number];

/** Encode a class-id grid as a palette-indexed PNG; palette index = class id. */
export function encodeLayoutPng(grid: Uint8Array, size: number, palette: Rgb[]): Uint8Array {
  if (grid.length !== size * size) throw new Error("grid/size mismatch");
  const ihdr = new Uint8Array(13);
  ihdr.set(u32be(size), 0);
  ihdr.set(u32be(size), 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 3; // palette color type
  const plte = new Uint8Array(256 * 3);
  palette.forEach(([r, g, b], i) => {
    plte[i * 3] = r;
    plte[i * 3 + 1] = g;
    plte[i * 3 + 2] = b;
  });
  const raw = new Uint8Array(size * (size + 1));
  for (let y = 0; y < size; y++) {
    raw[y * (size + 1)] = 0; // filter: none
    raw.set(grid.subarray(y * size, (y + 1) * size), y * (size + 1) + 1);
  }
  const pieces = [
    SIGNATURE,
    chunk("IHDR", ihdr),
    chunk("PLTE", plte),
    chunk("IDAT", zlibStored(raw)),
    chunk("IEND", new Uint8Array(0)),
  ];
  const total = pieces.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let off = 0;
  for (const p of pieces) {
    out.set(p, off);
    off += p.length;
  }
  return out;
}

export interface DecodedLayout {
  size: number;
  grid: Uint8Array;
  palette: Rgb[];
}

/** Decode a palette PNG produced by encodeLayoutPng (stored deflate only). */
export function decodeLayoutPng(png: Uint8Array): DecodedLayout {
  for (let i = 0; i < 8; i++) {
    if (png[i] !== SIGNATURE[i]) throw new Error("not a PNG");
  }
  let off = 8;
  let width = 0;
  let height = 0;
  let palette: Rgb[] = [];
  const idat: Uint8Array[] = [];
  while (off < png.length) {
    const len = (png[off] << 24) | (png[off + 1] << 16) | (png[off + 2] << 8) | png[off + 3];
    const type = String.fromCharCode(png[off + 4], png[off + 5], png[off + 6], png[off + 7]);
    const body = png.subarray(off + 8, off + 8 + len);
    if (type === "IHDR") {
      width = (body[0] << 24) | (body[1] << 16) | (body[2] << 8) | body[3];
      height = (body[4] << 24) | (body[5] << 16) | (body[6] << 8) | body[7];
      if (body[8] !== 8 || body[9] !== 3) throw new Error("expected 8-bit palette PNG");
    } else if (type === "PLTE") {
      palette = [];
      for (let i = 0; i + 2 < body.length; i += 3) {
        palette.push([body[i], body[i + 1], body[i + 2]]);
      }
    } else if (type === "IDAT") {
      idat.push(body);
    }
    off += 12 + len;
  }
  if (width !== height) throw new Error("layout PNG must be square");
  const zcat = new Uint8Array(idat.reduce((n, p) => n + p.length, 0));
  let zo = 0;
  for (const p of idat) {
    zcat.set(p, zo);
    zo += p.length;
  }
  const raw = inflateStored(zcat);
  const grid = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    if (raw[y * (width + 1)] !== 0) throw new Error("unsupported PNG filter");
    grid.set(raw.subarray(y * (width + 1) + 1, (y + 1) * (width + 1)), y * width);
  }
  return { size: width, grid, palette };
}
