//! Browser bindings for the gait pipeline demo page.

use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub fn placeholder() -> u32 {
    1
}
