#pragma once

#include "hosi/core.hpp"
#include "hosi/cyclic_design.hpp"
#include "hosi/mobius.hpp"
#include "hosi/moment_indices.hpp"
#include "hosi/oracles.hpp"
#include "hosi/replicates.hpp"
#include "hosi/sampling.hpp"
#include "hosi/spectral.hpp"
#include "hosi/spectral_fourier.hpp"
#include "hosi/spectral_walsh.hpp"
#include "hosi/walsh.hpp"
