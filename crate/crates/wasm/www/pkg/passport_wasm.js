/* @ts-self-types="./passport_wasm.d.ts" */

/**
 * Monte Carlo estimate next to the solver value at the same start.
 */
export class CrossCheck {
    static __wrap(ptr) {
        const obj = Object.create(CrossCheck.prototype);
        obj.__wbg_ptr = ptr;
        CrossCheckFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        CrossCheckFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_crosscheck_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get ci95() {
        const ret = wasm.__wbg_get_crosscheck_ci95(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get mc_mean() {
        const ret = wasm.__wbg_get_crosscheck_mc_mean(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get u_pde() {
        const ret = wasm.__wbg_get_crosscheck_u_pde(this.__wbg_ptr);
        return ret;
    }
    /**
     * @param {number} arg0
     */
    set ci95(arg0) {
        wasm.__wbg_set_crosscheck_ci95(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set mc_mean(arg0) {
        wasm.__wbg_set_crosscheck_mc_mean(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set u_pde(arg0) {
        wasm.__wbg_set_crosscheck_u_pde(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) CrossCheck.prototype[Symbol.dispose] = CrossCheck.prototype.free;

export class Demo {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        DemoFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_demo_free(ptr, 0);
    }
    /**
     * Optimal control on the nearest time slice.
     * @param {number} t
     * @returns {Float64Array}
     */
    controls(t) {
        const ret = wasm.demo_controls(this.__wbg_ptr, t);
        if (ret[3]) {
            throw takeFromExternrefTable0(ret[2]);
        }
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {number} l0
     * @param {number} n_paths
     * @param {number} n_steps
     * @param {bigint} seed
     * @returns {CrossCheck}
     */
    cross_check(l0, n_paths, n_steps, seed) {
        const ret = wasm.demo_cross_check(this.__wbg_ptr, l0, n_paths, n_steps, seed);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return CrossCheck.__wrap(ret[0]);
    }
    /**
     * @param {number} z_min
     * @param {number} z_max
     * @param {number} n
     * @returns {Float64Array}
     */
    jump_densities(z_min, z_max, n) {
        const ret = wasm.demo_jump_densities(this.__wbg_ptr, z_min, z_max, n);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {number} r
     * @param {number} a
     * @param {number} sigma
     * @param {number} maturity
     */
    constructor(r, a, sigma, maturity) {
        const ret = wasm.demo_new(r, a, sigma, maturity);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        this.__wbg_ptr = ret[0];
        DemoFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * @returns {Float64Array}
     */
    nodes() {
        const ret = wasm.demo_nodes(this.__wbg_ptr);
        if (ret[3]) {
            throw takeFromExternrefTable0(ret[2]);
        }
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * `V(0, S, X)` with unit control bound.
     * @param {number} spot
     * @param {number} account
     * @returns {number}
     */
    price(spot, account) {
        const ret = wasm.demo_price(this.__wbg_ptr, spot, account);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return ret[0];
    }
    /**
     * @param {number} lambda
     * @param {number} p
     * @param {number} eta1
     * @param {number} eta2
     */
    set_kou(lambda, p, eta1, eta2) {
        const ret = wasm.demo_set_kou(this.__wbg_ptr, lambda, p, eta1, eta2);
        if (ret[1]) {
            throw takeFromExternrefTable0(ret[0]);
        }
    }
    /**
     * @param {number} lambda
     * @param {number} mu_j
     * @param {number} delta
     */
    set_merton(lambda, mu_j, delta) {
        const ret = wasm.demo_set_merton(this.__wbg_ptr, lambda, mu_j, delta);
        if (ret[1]) {
            throw takeFromExternrefTable0(ret[0]);
        }
    }
    set_no_jumps() {
        wasm.demo_set_no_jumps(this.__wbg_ptr);
    }
    /**
     * `u(t, ·)` on the nearest time slice.
     * @param {number} t
     * @returns {Float64Array}
     */
    slice(t) {
        const ret = wasm.demo_slice(this.__wbg_ptr, t);
        if (ret[3]) {
            throw takeFromExternrefTable0(ret[2]);
        }
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {number} nx
     * @param {number} nt
     */
    solve(nx, nt) {
        const ret = wasm.demo_solve(this.__wbg_ptr, nx, nt);
        if (ret[1]) {
            throw takeFromExternrefTable0(ret[0]);
        }
    }
    /**
     * `λ̃ - λ`, which must equal the compensator `∫(e^z - 1) ν(dz)`.
     * @returns {number}
     */
    tilt_gap() {
        const ret = wasm.demo_tilt_gap(this.__wbg_ptr);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return ret[0];
    }
}
if (Symbol.dispose) Demo.prototype[Symbol.dispose] = Demo.prototype.free;
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./passport_wasm_bg.js": import0,
    };
}

const CrossCheckFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_crosscheck_free(ptr, 1));
const DemoFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_demo_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('passport_wasm_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
