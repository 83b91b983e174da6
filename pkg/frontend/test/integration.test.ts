// Live round trip against a running service plus CLI replay.
//
//   SEMDIFF_SERVICE_URL  e.g. http://127.0.0.1:8787 (skips when unset)
//   SEMDIFF_CHECKPOINT   checkpoint path for the CLI replay
//   SEMDIFF_PYTHON       python executable (default python3)
//
// Normally driven by ./run_integration.sh, which boots a service on a
// fresh tiny checkpoint first.

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { inflateSync } from "node:zlib";

import { describe, expect, it } from "vitest";

import { StudioClient, b64decode, b64encode } from "../src/api.js";
import { CanvasState } from "../src/grid.js";
import { encodeLayoutPng, Rgb } from "../src/png.js";

const SERVICE = process.env.SEMDIFF_SERVICE_URL;
const CHECKPOINT = process.env.SEMDIFF_CHECKPOINT;
const PYTHON = process.env.SEMDIFF_PYTHON ?? "python3";

/** Minimal RGB PNG reader for service-produced images (node-side only). */
function decodeRgbPng(png: Uint8Array): { w: number; h: number; rgb: Uint8Array } {
  let off = 8;
  let w = 0;
  let h = 0;
  let channels = 3;
  const idat: Uint8Array[] = [];
  while (off < png.length) {
    const len = (png[off] << 24) | (png[off + 1] << 16) | (png[off + 2] << 8) | png[off + 3];
    const type = String.fromCharCode(png[off + 4], png[off + 5], png[off + 6], png[off + 7]);
    const body = png.subarray(off + 8, off + 8 + len);
    if (type === "IHDR") {
      w = (body[0] << 24) | (body[1] << 16) | (body[2] << 8) | body[3];
      h = (body[4] << 24) | (body[5] << 16) | (body[6] << 8) | body[7];
      if (body[8] !== 8) throw new Error("expected 8-bit PNG");
      if (body[9] === 2) channels = 3;
      else if (body[9] === 6) channels = 4;
      else throw new Error(`unsupported color type ${body[9]}`);
    } else if (type === "IDAT") {
      idat.push(body);
    }
    off += 12 + len;
  }
  const z = Buffer.concat(idat.map((b) => Buffer.from(b)));
  const raw = inflateSync(z);
  const stride = w * channels;
  const out = new Uint8Array(h * w * 3);
  const recon = new Uint8Array(stride);
  const prior = new Uint8Array(stride);
  for (let y = 0; y < h; y++) {
    const filter = raw[y * (stride + 1)];
    const line = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    for (let i = 0; i < stride; i++) {
      const a = i >= channels ? recon[i - channels] : 0;
      const b = prior[i];
      const c = i >= channels ? prior[i - channels] : 0;
      let v = line[i];
      if (filter === 1) v += a;
      else if (filter === 2) v += b;
      else if (filter === 3) v += (a + b) >> 1;
      else if (filter === 4) {
        const p = a + b - c;
        const pa = Math.abs(p - a);
        const pb = Math.abs(p - b);
        const pc = Math.abs(p - c);
        v += pa <= pb && pa <= pc ? a : pb <= pc ? b : c;
      } else if (filter !== 0) throw new Error(`unknown filter ${filter}`);
      recon[i] = v & 0xff;
    }
    prior.set(recon);
    for (let x = 0; x < w; x++) {
      for (let ch = 0; ch < 3; ch++) out[(y * w + x) * 3 + ch] = recon[x * channels + ch];
    }
  }
  return { w, h, rgb: out };
}

describe.skipIf(!SERVICE || !CHECKPOINT)("studio round trip against a live service", () => {
  it("paint -> generate -> select -> repaint -> edit, then CLI replay", async () => {
    const client = new StudioClient(SERVICE!);
    const pal = await client.palette();
    const palette: Rgb[] = pal.classes.map((c) => c.rgb);
    const n = pal.image_size;
    const state = new CanvasState(n, pal.classes.length);

    // paint: a blob of class 1 and a stripe of class 2
    state.paint([{ x: n / 4, y: n / 4 }], { classId: 1, radius: n / 5 });
    state.paint([{ x: 1, y: n - 2 }, { x: n - 2, y: n - 2 }], { classId: 2, radius: 1 });

    const layout1 = encodeLayoutPng(state.grid, n, palette);
    const gallery = await client.generate({
      layoutPngB64: b64encode(layout1),
      guidanceScale: 1.5,
      steps: 8,
      seed: 7,
      numSamples: 2,
    });
    expect(gallery).toHaveLength(2);
    expect(gallery[0]).not.toBe(gallery[1]);

    // locked seed: identical gallery on a repeated click
    const again = await client.generate({
      layoutPngB64: b64encode(layout1),
      guidanceScale: 1.5,
      steps: 8,
      seed: 7,
      numSamples: 2,
    });
    expect(again).toEqual(gallery);

    // select a region and repaint it with class 3
    state.select([{ x: (3 * n) / 4, y: (3 * n) / 4 }], n / 5);
    expect(state.selectionEmpty()).toBe(false);
    state.paint([{ x: (3 * n) / 4, y: (3 * n) / 4 }], { classId: 3, radius: n / 5 });
    const layout2 = encodeLayoutPng(state.grid, n, palette);
    const maskPng = encodeLayoutPng(state.selection, n, [[0, 0, 0], [255, 255, 255]]);

    const edited = await client.edit({
      sourcePngB64: gallery[0],
      layoutPngB64: b64encode(layout2),
      maskPngB64: b64encode(maskPng),
      guidanceScale: 1.5,
      steps: 8,
      seed: 9,
    });

    // outside-selection pixels must equal the source exactly
    const src = decodeRgbPng(b64decode(gallery[0]));
    const out = decodeRgbPng(b64decode(edited));
    expect(out.w).toBe(n);
    let checked = 0;
    for (let i = 0; i < n * n; i++) {
      if (state.selection[i]) continue;
      for (let c = 0; c < 3; c++) {
        expect(out.rgb[i * 3 + c]).toBe(src.rgb[i * 3 + c]);
      }
      checked++;
    }
    expect(checked).toBeGreaterThan(0);

    // empty selection edit returns the source byte-for-byte
    const empty = encodeLayoutPng(new Uint8Array(n * n), n, [[0, 0, 0], [255, 255, 255]]);
    const untouched = await client.edit({
      sourcePngB64: gallery[0],
      layoutPngB64: b64encode(layout2),
      maskPngB64: b64encode(empty),
      guidanceScale: 1.5,
      steps: 8,
      seed: 9,
    });
    expect(untouched).toBe(gallery[0]);

    // replay the exported log through the CLI: byte-identical images
    const log = JSON.parse(client.exportLog());
    const work = mkdtempSync(join(tmpdir(), "semdiff-replay-"));
    for (const [i, entry] of log.entries.entries()) {
      const dir = join(work, `entry${i}`);
      const argv: string[] = ["-m", "semdiff.cli", entry.cli[0],
                              "--checkpoint", CHECKPOINT!];
      const layoutPath = join(work, `layout${i}.png`);
      writeFileSync(layoutPath, b64decode(entry.body.layout_png));
      for (let k = 1; k < entry.cli.length; k++) {
        const tok: string = entry.cli[k];
        if (tok === "{layout.png}") argv.push(layoutPath);
        else if (tok === "{source.png}") {
          const p = join(work, `source${i}.png`);
          writeFileSync(p, b64decode(entry.body.source_png));
          argv.push(p);
        } else if (tok === "{mask.png}") {
          const p = join(work, `mask${i}.png`);
          writeFileSync(p, b64decode(entry.body.mask_png));
          argv.push(p);
        } else argv.push(tok);
      }
      if (entry.kind === "generate") {
        argv.push("--out", dir);
        execFileSync(PYTHON, argv, { stdio: "pipe" });
        for (const [j, imgB64] of entry.imagesB64.entries()) {
          const cliBytes = readFileSync(join(dir, `sample_${String(j).padStart(3, "0")}.png`));
          expect(Buffer.compare(cliBytes, Buffer.from(b64decode(imgB64)))).toBe(0);
        }
      } else {
        const outPath = join(dir, "edited.png");
        argv.push("--out", outPath);
        execFileSync(PYTHON, argv, { stdio: "pipe" });
        const cliBytes = readFileSync(outPath);
        expect(Buffer.compare(cliBytes, Buffer.from(b64decode(entry.imagesB64[0])))).toBe(0);
      }
    }
  }, 300_000);
});
