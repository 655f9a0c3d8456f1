/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_advance: (a: number, b: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const demo_paint: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const demo_readout: (a: number) => [number, number, number, number];
export const demo_rgba: (a: number) => [number, number];
export const demo_size: (a: number) => number;
export const minimizer: (a: number, b: number) => [number, number, number];
export const potentialCurve: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
