#ifndef HOM_HOM_HPP
#define HOM_HOM_HPP

#include "hom/config.hpp"
#include "hom/correlation.hpp"
#include "hom/csv_io.hpp"
#include "hom/error.hpp"
#include "hom/fitting.hpp"
#include "hom/lineshape.hpp"
#include "hom/spectrum.hpp"
#include "hom/stark.hpp"
#include "hom/synthdata.hpp"
#include "hom/units.hpp"
#include "hom/visibility.hpp"

#endif // HOM_HOM_HPP
