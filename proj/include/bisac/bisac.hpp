#pragma once

// Umbrella header for the bistatic MIMO-OFDM ISAC simulation library.

#include "bisac/array_geometry.hpp"
#include "bisac/comm.hpp"
#include "bisac/common.hpp"
#include "bisac/fft.hpp"
#include "bisac/frame_grid.hpp"
#include "bisac/hardware_response.hpp"
#include "bisac/impairments.hpp"
#include "bisac/io.hpp"
#include "bisac/ldpc.hpp"
#include "bisac/metrics.hpp"
#include "bisac/radar.hpp"
#include "bisac/records.hpp"
#include "bisac/resample.hpp"
#include "bisac/runner.hpp"
#include "bisac/scenario.hpp"
#include "bisac/sync.hpp"
#include "bisac/waveform.hpp"
#include "bisac/window.hpp"
