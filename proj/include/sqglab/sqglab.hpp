#pragma once

#include "sqglab/grid.hpp"
#include "sqglab/parallel.hpp"
#include "sqglab/fft.hpp"
#include "sqglab/spectral.hpp"
#include "sqglab/kernel_oracle.hpp"
#include "sqglab/littlewood_paley.hpp"
#include "sqglab/lipschitz.hpp"
#include "sqglab/mollifier.hpp"
#include "sqglab/initial_conditions.hpp"
#include "sqglab/solver.hpp"
#include "sqglab/transport.hpp"
#include "sqglab/test_class.hpp"
#include "sqglab/holder.hpp"
#include "sqglab/chain.hpp"
#include "sqglab/monitors.hpp"
#include "sqglab/io/config.hpp"
#include "sqglab/io/files.hpp"
#include "sqglab/cli.hpp"
