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

use curvegraph::graph::WeightedGraph;
use curvegraph::io::parse_pairs;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    // Ids with commas exercise the ambiguous-split path.
    let ids = [("a", 1.0), ("b,c", 1.0), ("b", 1.0), ("c", 1.0), ("a,b", 1.0)];
    let edges = [("a", "b,c", 1.0), ("b", "c", 1.0), ("a,b", "a", 1.0)];
    let g = WeightedGraph::build(&ids, &edges, true).expect("fixed graph is valid");
    if let Ok(sel) = parse_pairs(src, &g) {
        for (x, y) in sel.pairs(g.len()) {
            assert!(x < g.len() && y < g.len());
        }
    }
});
