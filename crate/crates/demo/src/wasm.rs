// SPDX-License-Identifier: Apache-2.0

use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Demo {
    city: crate::City,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(side: usize) -> Result<Demo, JsValue> {
        crate::City::grid(side).map(|city| Demo { city }).map_err(|e| JsValue::from_str(&e))
    }

    pub fn network(&self) -> String {
        self.city.network_json()
    }

    pub fn nearest(&self, lat: f64, lon: f64) -> String {
        self.city.nearest_json(lat, lon)
    }

    #[wasm_bindgen(js_name = compareRoutes)]
    pub fn compare_routes(&self, from: i64, to: i64) -> String {
        self.city.compare_routes_json(from, to)
    }

    pub fn heatmap(&self, metric: &str) -> String {
        self.city.heatmap_json(metric)
    }

    pub fn communities(&self, gamma: f64, seed: u64) -> String {
        self.city.communities_json(gamma, seed)
    }
}
