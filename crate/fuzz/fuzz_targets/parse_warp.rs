// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

#![no_main]

use std::path::Path;

use curvegraph::io::{parse_warp, warp_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    // Relative graph paths resolve under a directory that does not exist.
    let base = Path::new("/nonexistent/curvegraph-fuzz");
    if let Ok(spec) = parse_warp(src, Some(base)) {
        let text = warp_to_string(&spec);
        let back = parse_warp(&text, None).expect("canonical output parses");
        assert_eq!(back, spec);
    }
});
