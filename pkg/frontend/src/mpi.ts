/** MPI container manifest types and validation.
 *
 * Mirrors the on-disk container contract: manifest.json plus one RGBA PNG per
 * layer, ordered far to near with strictly increasing disparities. Validation
 * matches the producer's load semantics so the viewer rejects the same
 * containers the pipeline would.
 */

export const SUPPORTED_MAJOR = 1;

export interface Intrinsics {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
}

export interface LayerEntry {
  disparity: number;
  file: string;
}

export interface Manifest {
  intrinsics: Intrinsics;
  layer_count: number;
  layers: LayerEntry[];
  parallax_scale: number;
  source_dims: { height: number; width: number };
  version: { major: number; minor: number };
}

/** One decoded layer: RGBA in [0,1], row-major, plus its plane disparity. */
export interface MpiLayer {
  rgba: Float64Array; // length h*w*4
  disparity: number;
  height: number;
  width: number;
}

export interface Mpi {
  layers: MpiLayer[]; // far -> near
  intrinsics: Intrinsics;
  parallaxScale: number;
  height: number;
  width: number;
}

export class ContainerError extends Error {}

/** Validate a parsed manifest object; throws ContainerError on violations. */
export function validateManifest(raw: unknown): Manifest {
  if (typeof raw !== "object" || raw === null) {
    throw new ContainerError("manifest is not a JSON object");
  }
  const m = raw as Partial<Manifest>;
  const major = m.version?.major;
  if (major !== SUPPORTED_MAJOR) {
    throw new ContainerError(`unsupported container major version ${major}`);
  }
  const layers = m.layers;
  if (!Array.isArray(layers) || layers.length === 0) {
    throw new ContainerError("container has no layers");
  }
  if (m.layer_count !== layers.length) {
    throw new ContainerError("layer_count does not match listed layers");
  }
  let prev = -Infinity;
  layers.forEach((entry, i) => {
    if (typeof entry.disparity !== "number" || typeof entry.file !== "string") {
      throw new ContainerError(`layer ${i} entry is malformed`);
    }
    if (entry.disparity <= prev) {
      throw new ContainerError(`layer ${i} disparity ${entry.disparity} not increasing`);
    }
    prev = entry.disparity;
  });
  const dims = m.source_dims;
  if (!dims || !(dims.height > 0) || !(dims.width > 0)) {
    throw new ContainerError("missing or invalid source_dims");
  }
  const k = m.intrinsics;
  if (!k || !(k.fx > 0) || !(k.fy > 0)) {
    throw new ContainerError("missing or invalid intrinsics");
  }
  return {
    intrinsics: k as Intrinsics,
    layer_count: layers.length,
    layers: layers as LayerEntry[],
    parallax_scale: typeof m.parallax_scale === "number" ? m.parallax_scale : 1.0,
    source_dims: dims,
    version: m.version as Manifest["version"],
  };
}

/** Convert 8-bit RGBA pixels to a normalized layer raster. */
export function layerFromBytes(
  bytes: Uint8Array | Uint8ClampedArray,
  width: number,
  height: number,
  disparity: number,
): MpiLayer {
  if (bytes.length !== width * height * 4) {
    throw new ContainerError(
      `layer pixel buffer has ${bytes.length} bytes, expected ${width * height * 4}`,
    );
  }
  const rgba = new Float64Array(bytes.length);
  for (let i = 0; i < bytes.length; i++) rgba[i] = bytes[i] / 255;
  return { rgba, disparity, height, width };
}

/** Assemble an MPI from decoded layers, checking dimensions. */
export function assembleMpi(manifest: Manifest, layers: MpiLayer[]): Mpi {
  const { height, width } = manifest.source_dims;
  layers.forEach((layer, i) => {
    if (layer.height !== height || layer.width !== width) {
      throw new ContainerError(
        `layer ${i} has dims ${layer.height}x${layer.width}, expected ${height}x${width}`,
      );
    }
  });
  return {
    layers,
    intrinsics: manifest.intrinsics,
    parallaxScale: manifest.parallax_scale,
    height,
    width,
  };
}
