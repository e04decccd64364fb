#ifndef PATMOM_PATMOM_HPP
#define PATMOM_PATMOM_HPP

#include "patmom/combinatorics.hpp"
#include "patmom/dfa.hpp"
#include "patmom/edgeworth.hpp"
#include "patmom/embedding.hpp"
#include "patmom/gram_charlier.hpp"
#include "patmom/linalg.hpp"
#include "patmom/markov_model.hpp"
#include "patmom/moments.hpp"
#include "patmom/oracle.hpp"
#include "patmom/pattern.hpp"
#include "patmom/truncated_poly.hpp"

#endif  // PATMOM_PATMOM_HPP
