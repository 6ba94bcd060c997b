import { inflateSync } from "node:zlib";
import { describe, expect, it } from "vitest";

import { crc32, encodePng, PNG_SIGNATURE } from "../src/png.js";

function readChunks(buf: Buffer): Array<{ type: string; data: Buffer; crc: number }> {
  const chunks = [];
  let off = 8;
  while (off < buf.length) {
    const len = buf.readUInt32BE(off);
    const type = buf.subarray(off + 4, off + 8).toString("ascii");
    const data = buf.subarray(off + 8, off + 8 + len);
    const crc = buf.readUInt32BE(off + 8 + len);
    chunks.push({ type, data, crc });
    off += 12 + len;
  }
  return chunks;
}

describe("encodePng", () => {
  it("writes a structurally valid RGBA png", () => {
    const w = 5;
    const h = 3;
    const rgba = new Uint8Array(w * h * 4);
    for (let i = 0; i < rgba.length; i += 4) {
      rgba[i] = 10;
      rgba[i + 1] = 200;
      rgba[i + 2] = 30;
      rgba[i + 3] = 255;
    }
    const png = encodePng(w, h, rgba);
    expect(png.subarray(0, 8).equals(PNG_SIGNATURE)).toBe(true);

    const chunks = readChunks(png);
    expect(chunks.map((c) => c.type)).toEqual(["IHDR", "IDAT", "IEND"]);

    const ihdr = chunks[0].data;
    expect(ihdr.readUInt32BE(0)).toBe(w);
    expect(ihdr.readUInt32BE(4)).toBe(h);
    expect(ihdr.readUInt8(8)).toBe(8); // bit depth
    expect(ihdr.readUInt8(9)).toBe(6); // RGBA

    for (const c of chunks) {
      const body = Buffer.concat([Buffer.from(c.type, "ascii"), c.data]);
      expect(crc32(body)).toBe(c.crc);
    }

    const raw = inflateSync(chunks[1].data);
    expect(raw.length).toBe(h * (1 + w * 4));
    expect(raw[0]).toBe(0); // filter byte
    expect(raw[1]).toBe(10);
    expect(raw[2]).toBe(200);
  });

  it("rejects a mismatched pixel buffer", () => {
    expect(() => encodePng(4, 4, new Uint8Array(10))).toThrow(/expected/);
  });
});
