/**
 * Bindings for the kpbench corruption and augmentation operators over raw
 * 8-bit RGB arrays.
 *
 * Each call round-trips through the benchmark's command-line interface
 * (temporary single-image dataset in, PNG out), so results are byte
 * identical to batch runs of the CLI with the same global seed and image
 * id. Set KPBENCH_CLI to point at the executable if it is not on PATH.
 */

import { mkdir, readFile, writeFile } from "node:fs/promises";
import { join } from "node:path";

import { decodePng, encodePng, RawImage } from "./png.js";
import { runCli, withWorkspace } from "./runner.js";

export const VERSION = "0.1.0";

export type RgbImage = RawImage;

export const CORRUPTION_KINDS = [
  "motion_blur",
  "gaussian_noise",
  "impulse_noise",
  "pixelate",
  "jpeg_compression",
  "color_quant",
  "brightness",
  "darkness",
  "contrast",
  "mask",
] as const;

export type CorruptionKind = (typeof CORRUPTION_KINDS)[number];

export const AUGMENTATION_SETS = ["A", "B", "C", "D"] as const;

export type DatasetProfile = "coco" | "ochuman" | "ap10k";

export interface ApplyOptions {
  /** Image id fed into the per-image seed derivation (default 0). */
  imageId?: number;
  /** Dataset profile selecting the mask size column (default "coco"). */
  profile?: DatasetProfile;
  /** Flat (x, y, v) triplets; required for the mask corruption. */
  keypoints?: number[];
  /** Gaussian-noise sigma multiplier (default 1). */
  noiseGain?: number;
  /** Mask fill value 0..255 (default 0). */
  maskFill?: number;
}

export interface AugmentOptions {
  /** Image id fed into the per-image seed derivation (default 0). */
  imageId?: number;
  /** Per-transform application probability override (default 0.5). */
  probability?: number;
}

function checkImage(image: RgbImage): void {
  if (!Number.isInteger(image.width) || !Number.isInteger(image.height)) {
    throw new Error("image width/height must be integers");
  }
  if (image.width < 1 || image.height < 1) {
    throw new Error(`image dimensions must be >= 1, got ${image.width}x${image.height}`);
  }
  if (image.data.length !== image.width * image.height * 3) {
    throw new Error(
      `pixel buffer length ${image.data.length} does not match ` +
        `${image.width}x${image.height}x3`
    );
  }
}

function checkSeed(seed: number): void {
  if (!Number.isInteger(seed) || seed < 0) {
    throw new Error(`seed must be a non-negative integer, got ${seed}`);
  }
}

interface AnnotationPayload {
  images: object[];
  annotations: object[];
  categories: object[];
}

function datasetPayload(image: RgbImage, imageId: number, keypoints?: number[]): AnnotationPayload {
  const annotations: object[] = [];
  let keypointCount = 17;
  if (keypoints !== undefined) {
    if (keypoints.length === 0 || keypoints.length % 3 !== 0) {
      throw new Error(
        `keypoints must be non-empty flat (x, y, v) triplets, got length ${keypoints.length}`
      );
    }
    keypointCount = keypoints.length / 3;
    const xs = keypoints.filter((_, i) => i % 3 === 0);
    const ys = keypoints.filter((_, i) => i % 3 === 1);
    const vs = keypoints.filter((_, i) => i % 3 === 2);
    const minX = Math.min(...xs);
    const minY = Math.min(...ys);
    const extent = (Math.max(...xs) - minX) * (Math.max(...ys) - minY);
    annotations.push({
      id: 1,
      image_id: imageId,
      category_id: 1,
      keypoints,
      num_keypoints: vs.filter((v) => v > 0).length,
      area: Math.max(extent, 1.0),
      bbox: [minX, minY, Math.max(...xs) - minX, Math.max(...ys) - minY],
      iscrowd: 0,
    });
  }
  return {
    images: [
      { id: imageId, file_name: "input.png", width: image.width, height: image.height },
    ],
    annotations,
    categories: [
      {
        id: 1,
        name: "instance",
        keypoints: Array.from({ length: keypointCount }, (_, i) => `kp_${i}`),
      },
    ],
  };
}

async function writeWorkspaceInputs(
  dir: string,
  image: RgbImage,
  payload: AnnotationPayload
): Promise<{ annotations: string; imagesRoot: string; outputRoot: string }> {
  const imagesRoot = join(dir, "images");
  await mkdir(imagesRoot, { recursive: true });
  await writeFile(join(imagesRoot, "input.png"), encodePng(image));
  const annotations = join(dir, "annotations.json");
  await writeFile(annotations, JSON.stringify(payload));
  return { annotations, imagesRoot, outputRoot: join(dir, "out") };
}

/**
 * Apply one corruption at one severity to an RGB image.
 *
 * Byte-identical to the CLI's `corrupt` subcommand corrupting the same
 * pixels with the same global seed and image id.
 */
export async function boundApply(
  image: RgbImage,
  kind: string,
  severity: number,
  seed: number,
  options: ApplyOptions = {}
): Promise<RgbImage> {
  checkImage(image);
  checkSeed(seed);
  const kindName = kind.trim().toLowerCase() as CorruptionKind;
  if (!CORRUPTION_KINDS.includes(kindName)) {
    throw new Error(
      `unknown corruption kind '${kind}'; valid kinds: ${CORRUPTION_KINDS.join(", ")}`
    );
  }
  if (!Number.isInteger(severity) || severity < 1 || severity > 5) {
    throw new Error(`severity out of range: ${severity} (valid range is 1..5)`);
  }
  if (kindName === "mask" && options.keypoints === undefined) {
    throw new Error("mask corruption requires options.keypoints (flat x, y, v triplets)");
  }

  const imageId = options.imageId ?? 0;
  return withWorkspace(async (dir) => {
    const payload = datasetPayload(image, imageId, options.keypoints);
    const { annotations, imagesRoot, outputRoot } = await writeWorkspaceInputs(
      dir,
      image,
      payload
    );
    const args = [
      "corrupt",
      "--annotations", annotations,
      "--images-root", imagesRoot,
      "--output-root", outputRoot,
      "--profile", options.profile ?? "coco",
      "--seed", String(seed),
      "--corruptions", kindName,
      "--severities", String(severity),
      "--workers", "1",
    ];
    if (options.noiseGain !== undefined) {
      args.push("--noise-gain", String(options.noiseGain));
    }
    if (options.maskFill !== undefined) {
      args.push("--mask-fill", String(options.maskFill));
    }
    await runCli(args);
    const outputPath = join(outputRoot, kindName, String(severity), "input.png");
    return decodePng(await readFile(outputPath));
  });
}

/**
 * Apply the requested augmentation sets (A-D) to an RGB image.
 *
 * Parity contract: identical bytes across calls and with the CLI's
 * `augment` subcommand for the same (image, sets, seed, image id).
 */
export async function boundAugment(
  image: RgbImage,
  sets: string[],
  seed: number,
  options: AugmentOptions = {}
): Promise<RgbImage> {
  checkImage(image);
  checkSeed(seed);
  if (sets.length === 0) {
    throw new Error(
      `at least one augmentation set id is required (valid ids: ${AUGMENTATION_SETS.join(", ")})`
    );
  }
  const normalized = sets.map((s) => s.trim().toUpperCase());
  for (const setId of normalized) {
    if (!(AUGMENTATION_SETS as readonly string[]).includes(setId)) {
      throw new Error(
        `unknown augmentation set '${setId}'; valid ids: ${AUGMENTATION_SETS.join(", ")}`
      );
    }
  }
  if (new Set(normalized).size !== normalized.length) {
    throw new Error(`duplicate augmentation set in [${sets.join(", ")}]`);
  }
  if (
    options.probability !== undefined &&
    (options.probability < 0 || options.probability > 1)
  ) {
    throw new Error(`probability must be in [0, 1], got ${options.probability}`);
  }

  const imageId = options.imageId ?? 0;
  return withWorkspace(async (dir) => {
    const payload = datasetPayload(image, imageId);
    const { annotations, imagesRoot, outputRoot } = await writeWorkspaceInputs(
      dir,
      image,
      payload
    );
    const args = [
      "augment",
      "--annotations", annotations,
      "--images-root", imagesRoot,
      "--output-root", outputRoot,
      "--sets", normalized.join(","),
      "--copies", "1",
      "--seed", String(seed),
    ];
    if (options.probability !== undefined) {
      args.push("--probability", String(options.probability));
    }
    await runCli(args);
    const outputPath = join(outputRoot, "images", "input_aug0.png");
    return decodePng(await readFile(outputPath));
  });
}

export { decodePng, encodePng } from "./png.js";
export { CliError, cliCommand } from "./runner.js";
