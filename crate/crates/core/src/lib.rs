//! Marked graphs of finite groups, their norms and star graphs, Whitehead
//! moves, and constructive connectivity at infinity for the spine of reduced
//! outer space of a free product `A_1 * ... * A_n * F_k`.

pub mod algebra;
pub mod calculus;
pub mod connectivity;
pub mod presentation;
pub mod gog;
pub mod io;
pub mod sample;
pub mod spine;

pub use algebra::{
    build_standard_w, classify, cyclic_normal_form, reduce_word, AlgebraError, Classification,
    CyclicWord, Ends, FactorSignature, FiniteGroupTable, Letter, Word,
};
pub use calculus::{check_lemma, find_size_two_increasing, scan_graph, scan_patch, CalculusError, LemmaId, MultiGraph, Verdict};
pub use connectivity::{
    build_ray, eliminate_local_min, find_good_polygon, push_loop, push_outside_ball, reroute_compatible,
    shrink_to_size_two, standardize_path, validate_good_polygon, Checker, ConnectivityError, GoodPolygon,
    HomotopyCertificate, PolygonOutcome, Ray, StandardPath,
};
pub use presentation::{catalog_report, verify_catalog, CatalogReport, FPAutomorphism, FreeProduct, Gen, PresentationError};
pub use io::{
    parse_context, parse_group_file, parse_marked_graph, path_from_json, path_to_json, write_context, write_marked_graph,
    ParseError,
};
pub use gog::{EdgePath, GogError, GraphOfGroups, LoopRep, Step, VertexGroup};
pub use spine::{
    blow_up, check_eq_star, explore_ball, whitehead_move, Ball, BallConfig, CanonicalKey, Context,
    Direction, IdealEdge, MarkedGraph, MarkedGraphData, Move, SpineError, StarGraph,
};
