/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_scenario_free: (a: number, b: number) => void;
export const scenario_capacity: (a: number, b: number) => [number, number];
export const scenario_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const scenario_outage_curve: (a: number, b: number, c: number, d: number) => [number, number];
export const scenario_simulate: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const scenario_sndr_ceiling: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
