/* tslint:disable */
/* eslint-disable */

/**
 * Reference link with the knobs the page exposes.
 */
export class Scenario {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[ec, upper bound, ceiling]` in bps/Hz at μ₁ = μ_r = `snr_db`;
     * NaN where undefined, ∞ for an unbounded ceiling.
     */
    capacity(snr_db: number): Float64Array;
    /**
     * `protocol` "AF"/"DF"; `hardware` "ideal", "aggregate" (κ₁ = κ₂ =
     * `kappa`) or "sel"/"twta" (amplifier at `ibo_db`); `r` 1 heterodyne,
     * 2 IM/DD.
     */
    constructor(protocol: string, hardware: string, kappa: number, ibo_db: number, r: number, xi: number, gamma_th_db: number);
    /**
     * Flattened `[snr_db, op, op_asymptote]` rows; failed cells are NaN.
     */
    outage_curve(start_db: number, stop_db: number, step_db: number): Float64Array;
    /**
     * `[mc_op, stderr, analytic_op, mc_ec, stderr, analytic_ec]`.
     */
    simulate(snr_db: number, samples: number, seed: number): Float64Array;
    sndr_ceiling(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_scenario_free: (a: number, b: number) => void;
    readonly scenario_capacity: (a: number, b: number) => [number, number];
    readonly scenario_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly scenario_outage_curve: (a: number, b: number, c: number, d: number) => [number, number];
    readonly scenario_simulate: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly scenario_sndr_ceiling: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
