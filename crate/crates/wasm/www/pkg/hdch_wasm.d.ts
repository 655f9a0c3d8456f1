/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    advance(steps: number): void;
    constructor(n: number, theta: number, nu2: number, mean: number, seed: number);
    /**
     * Paints a droplet at fractional coordinates `(fx, fy)`, `fy` measured
     * from the top of the image.
     */
    paint(fx: number, fy: number, radius: number, value: number): void;
    /**
     * `[t, mass, energy, separation, ‖u‖]`.
     */
    readout(): Float64Array;
    rgba(): Uint8Array;
    size(): number;
}

export function minimizer(theta: number, theta0: number): number;

/**
 * Interleaved `[s0, Ψ(s0), s1, Ψ(s1), ...]`.
 */
export function potentialCurve(theta: number, theta0: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_advance: (a: number, b: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly demo_paint: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly demo_readout: (a: number) => [number, number, number, number];
    readonly demo_rgba: (a: number) => [number, number];
    readonly demo_size: (a: number) => number;
    readonly minimizer: (a: number, b: number) => [number, number, number];
    readonly potentialCurve: (a: number, b: number, c: number) => [number, number, number, number];
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
