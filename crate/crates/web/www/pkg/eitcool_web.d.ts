/* tslint:disable */
/* eslint-disable */

export function absorption(rabi: number, detuning: number, gamma: number, start: number, stop: number, points: number): Float64Array;

/**
 * `[E₋, E₊]`.
 */
export function dressed_energies(rabi: number, detuning: number): Float64Array;

export function rates_vs_mr(gamma: number, eta: number, m_start: number, m_stop: number, points: number): Float64Array;

export function robustness(m_r: number, gamma: number, eta: number, omega_m_mhz: number, temperature_mk: number, max_deviation: number, points: number, gamma_mech_hz: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly absorption: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly dressed_energies: (a: number, b: number) => [number, number, number, number];
    readonly rates_vs_mr: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly robustness: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
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
