#ifndef KERROMIT_KERROMIT_HPP
#define KERROMIT_KERROMIT_HPP

#include "kerromit/analysis.hpp"
#include "kerromit/config.hpp"
#include "kerromit/constants.hpp"
#include "kerromit/cubic.hpp"
#include "kerromit/error.hpp"
#include "kerromit/linalg.hpp"
#include "kerromit/oracle.hpp"
#include "kerromit/parallel.hpp"
#include "kerromit/params.hpp"
#include "kerromit/presets.hpp"
#include "kerromit/response.hpp"
#include "kerromit/rk4.hpp"
#include "kerromit/steady_state.hpp"
#include "kerromit/sweeps.hpp"
#include "kerromit/table.hpp"

#endif
