//! Combinatorics of finite poc sets and median algebras.
//!
//! A poc set is a partial order with a least element and an
//! order-reversing involution; a median algebra is a set with a ternary
//! majority-style operation. At finite scale the two are dual: half
//! spaces of a median algebra form a poc set, ultrafilters of a poc set
//! form a median algebra, and evaluation into the double dual is an
//! isomorphism. This crate implements the objects, the duality, the
//! constructions turning poc data into median algebras, the cubical
//! nerve with its recognition theory, and finite group actions with the
//! fixed-cube machinery.

pub mod actions;
pub mod bits;
pub mod construct;
pub mod cubing;
pub mod duality;
pub mod graph;
pub mod iso;
pub mod median;
pub mod pocset;
