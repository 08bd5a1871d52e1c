// Decoder for the service's raw-float payloads: base64 of a JSON header line
// {"w":..,"h":..} followed by w*h little-endian float32 values.

export interface FloatImage {
  width: number;
  height: number;
  values: Float32Array;
}

function base64ToBytes(b64: string): Uint8Array {
  if (typeof atob === 'function') {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  // node path (tests)
  return new Uint8Array(Buffer.from(b64, 'base64'));
}

export function decodeRawFloat(b64: string): FloatImage {
  const bytes = base64ToBytes(b64);
  const newline = bytes.indexOf(0x0a);
  if (newline < 0) {
    throw new Error('raw-float payload has no header line');
  }
  const header = JSON.parse(new TextDecoder().decode(bytes.subarray(0, newline)));
  const width = Number(header.w);
  const height = Number(header.h);
  const need = width * height * 4;
  const payload = bytes.subarray(newline + 1, newline + 1 + need);
  if (payload.length < need) {
    throw new Error(`raw-float payload truncated: ${payload.length} < ${need}`);
  }
  // copy to guarantee alignment for the Float32Array view
  const aligned = new Uint8Array(payload).buffer;
  return { width, height, values: new Float32Array(aligned) };
}
