/* tslint:disable */
/* eslint-disable */

/**
 * Depth of the point `(x, y)`, read exactly from its binary value.
 */
export function probe(m: number, q: number, seed: number, x: number, y: number): string;

/**
 * The `k`-th outer crossing along the integer direction `u` for the
 * integer lattice (`alpha`) and the chosen set (`beta`).
 */
export function ray(m: number, q: number, seed: number, ux: number, uy: number, k: number): string;

/**
 * Faces of depth below `kmax` with their polygons, plus one summary row
 * per zone.
 */
export function zones(m: number, q: number, seed: number, kmax: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly probe: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly ray: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly zones: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
