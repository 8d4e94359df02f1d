# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event loop.

Mirrors engine.PySimulation exactly: same xoshiro256++ recurrence, same
draw order, same float expression shapes, same (time, seq) tie-breaking,
and the same seq consumption for immediate service_start records.  The
parity tests compare outputs bit-for-bit against the pure engine, so any
change here must be made in lockstep with engine.py.

Do not compile with -ffast-math.
"""

from libc.math cimport log
from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport uint8_t, int32_t, int64_t, uint64_t

import numpy as np

cdef enum:
    EV_ARRIVAL = 0
    EV_REQUEST_SENT = 1
    EV_SERVICE_END = 2
    EV_RESPONSE = 3

cdef enum:
    PK_UNCOORDINATED = 0
    PK_RANDOM = 1
    PK_ROUND_ROBIN = 2
    PK_ORACLE = 3

cdef double DOUBLE_UNIT = 1.0 / 9007199254740992.0  # 2**-53


cdef inline uint64_t rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t xo_next(uint64_t *s) noexcept nogil:
    cdef uint64_t x = s[0] + s[3]
    cdef uint64_t result = rotl(x, 23) + s[0]
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = rotl(s[3], 45)
    return result


cdef inline double xo_double(uint64_t *s) noexcept nogil:
    # uniform in (0, 1], identical to rng.Stream.next_double
    return <double>((xo_next(s) >> 11) + 1) * DOUBLE_UNIT


cdef inline double xo_exp(uint64_t *s, double mean) noexcept nogil:
    cdef double v = -mean * log(xo_double(s))
    if v <= 0.0:
        v = mean * 1e-300
    return v


# -- binary heap ordered by (time, seq) ---------------------------------------

cdef struct Heap:
    double *time
    uint64_t *seq
    uint8_t *kind
    int64_t *a          # request id, or client id for arrivals
    int64_t *b          # executor id
    uint8_t *probe
    Py_ssize_t n
    Py_ssize_t cap


cdef int heap_init(Heap *h, Py_ssize_t cap) noexcept nogil:
    h.time = <double *>malloc(cap * sizeof(double))
    h.seq = <uint64_t *>malloc(cap * sizeof(uint64_t))
    h.kind = <uint8_t *>malloc(cap * sizeof(uint8_t))
    h.a = <int64_t *>malloc(cap * sizeof(int64_t))
    h.b = <int64_t *>malloc(cap * sizeof(int64_t))
    h.probe = <uint8_t *>malloc(cap * sizeof(uint8_t))
    h.n = 0
    h.cap = cap
    if h.time == NULL or h.seq == NULL or h.kind == NULL or \
            h.a == NULL or h.b == NULL or h.probe == NULL:
        return -1
    return 0


cdef void heap_free(Heap *h) noexcept nogil:
    free(h.time); free(h.seq); free(h.kind); free(h.a); free(h.b); free(h.probe)


cdef int heap_grow(Heap *h) noexcept nogil:
    cdef Py_ssize_t cap = h.cap * 2
    h.time = <double *>realloc(h.time, cap * sizeof(double))
    h.seq = <uint64_t *>realloc(h.seq, cap * sizeof(uint64_t))
    h.kind = <uint8_t *>realloc(h.kind, cap * sizeof(uint8_t))
    h.a = <int64_t *>realloc(h.a, cap * sizeof(int64_t))
    h.b = <int64_t *>realloc(h.b, cap * sizeof(int64_t))
    h.probe = <uint8_t *>realloc(h.probe, cap * sizeof(uint8_t))
    h.cap = cap
    if h.time == NULL or h.seq == NULL or h.kind == NULL or \
            h.a == NULL or h.b == NULL or h.probe == NULL:
        return -1
    return 0


cdef inline void heap_swap(Heap *h, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double td
    cdef uint64_t tu
    cdef uint8_t tb
    cdef int64_t ta
    td = h.time[i]; h.time[i] = h.time[j]; h.time[j] = td
    tu = h.seq[i]; h.seq[i] = h.seq[j]; h.seq[j] = tu
    tb = h.kind[i]; h.kind[i] = h.kind[j]; h.kind[j] = tb
    ta = h.a[i]; h.a[i] = h.a[j]; h.a[j] = ta
    ta = h.b[i]; h.b[i] = h.b[j]; h.b[j] = ta
    tb = h.probe[i]; h.probe[i] = h.probe[j]; h.probe[j] = tb


cdef inline bint heap_less(Heap *h, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    if h.time[i] != h.time[j]:
        return h.time[i] < h.time[j]
    return h.seq[i] < h.seq[j]


cdef int heap_push(Heap *h, double time, uint64_t seq, uint8_t kind,
                   int64_t a, int64_t b, uint8_t probe) noexcept nogil:
    cdef Py_ssize_t i, parent
    if h.n == h.cap:
        if heap_grow(h) != 0:
            return -1
    i = h.n
    h.n += 1
    h.time[i] = time
    h.seq[i] = seq
    h.kind[i] = kind
    h.a[i] = a
    h.b[i] = b
    h.probe[i] = probe
    while i > 0:
        parent = (i - 1) >> 1
        if heap_less(h, i, parent):
            heap_swap(h, i, parent)
            i = parent
        else:
            break
    return 0


cdef void heap_pop(Heap *h) noexcept nogil:
    # caller reads slot 0 first
    cdef Py_ssize_t i = 0, left, right, smallest
    h.n -= 1
    if h.n == 0:
        return
    heap_swap(h, 0, h.n)
    while True:
        left = 2 * i + 1
        right = left + 1
        smallest = i
        if left < h.n and heap_less(h, left, smallest):
            smallest = left
        if right < h.n and heap_less(h, right, smallest):
            smallest = right
        if smallest == i:
            break
        heap_swap(h, i, smallest)
        i = smallest


# -- per-executor FIFO ring buffers (item = rid << 1 | probe) ------------------

cdef struct Fifo:
    uint64_t *buf
    Py_ssize_t head
    Py_ssize_t len
    Py_ssize_t cap


cdef int fifo_push(Fifo *f, uint64_t item) noexcept nogil:
    cdef uint64_t *nbuf
    cdef Py_ssize_t i
    if f.len == f.cap:
        nbuf = <uint64_t *>malloc(f.cap * 2 * sizeof(uint64_t))
        if nbuf == NULL:
            return -1
        for i in range(f.len):
            nbuf[i] = f.buf[(f.head + i) % f.cap]
        free(f.buf)
        f.buf = nbuf
        f.head = 0
        f.cap = f.cap * 2
    f.buf[(f.head + f.len) % f.cap] = item
    f.len += 1
    return 0


cdef inline uint64_t fifo_pop(Fifo *f) noexcept nogil:
    cdef uint64_t item = f.buf[f.head]
    f.head = (f.head + 1) % f.cap
    f.len -= 1
    return item


def run_kernel(double[::1] speeds,
               int64_t[:, ::1] pool,
               int64_t[:, ::1] pool_slot,
               double[:, ::1] lat_req,
               double[:, ::1] lat_resp,
               double[:, ::1] est,
               uint8_t[::1] arrival_kind,
               double[::1] arrival_param,
               uint8_t[::1] ops_kind,
               double[::1] ops_param,
               int64_t[::1] in_bytes,
               int64_t[::1] out_bytes,
               int policy_kind, double chi, double alpha,
               double horizon, double warmup,
               uint64_t[:, :, ::1] rng_states):
    """Run one simulation to the horizon; returns raw accumulators.

    `est` is modified in place (pass a copy of the initial estimates).
    """
    cdef Py_ssize_t E = speeds.shape[0]
    cdef Py_ssize_t C = pool.shape[0]
    cdef Py_ssize_t K = pool.shape[1]

    cdef Heap heap
    cdef Fifo *fifos = NULL
    # request registry
    cdef Py_ssize_t req_cap = 4096
    cdef int64_t *req_client = NULL
    cdef double *req_created = NULL
    cdef double *req_ops = NULL
    cdef int32_t *req_copies = NULL
    cdef int32_t *req_responded = NULL
    cdef uint8_t *req_recorded = NULL
    # samples
    cdef Py_ssize_t samp_cap = 4096, samp_n = 0
    cdef double *samples = NULL

    # executor state
    exec_cur_rid_np = np.full(E, -1, dtype=np.int64)
    exec_state_np = np.zeros((6, E), dtype=np.float64)
    served_count_np = np.zeros(E, dtype=np.int64)
    in_system_np = np.zeros(E, dtype=np.int64)
    cdef int64_t[::1] cur_rid = exec_cur_rid_np
    cdef uint8_t[::1] cur_probe = np.zeros(E, dtype=np.uint8)
    cdef double[::1] cur_start = exec_state_np[0]
    cdef double[::1] cur_dur = exec_state_np[1]
    cdef double[::1] busy_total = exec_state_np[2]
    cdef double[::1] busy_meas = exec_state_np[3]
    cdef double[::1] served_ops = exec_state_np[4]
    cdef int64_t[::1] served_count = served_count_np
    cdef int64_t[::1] in_system = in_system_np

    # per-client counters
    requests_sent_np = np.zeros(C, dtype=np.int64)
    probes_sent_np = np.zeros(C, dtype=np.int64)
    created_np = np.zeros(C, dtype=np.int64)
    cdef int64_t[::1] requests_sent = requests_sent_np
    cdef int64_t[::1] probes_sent = probes_sent_np
    cdef int64_t[::1] created = created_np
    cdef int64_t[::1] rr_next = np.zeros(C, dtype=np.int64)

    cdef uint64_t[:, :, ::1] st = rng_states.copy()
    cdef int64_t *probe_slots = <int64_t *>malloc(K * sizeof(int64_t))

    cdef uint64_t seq = 0
    cdef int64_t next_rid = 0, completed = 0, fully = 0
    cdef int64_t traffic = 0
    cdef double clock = 0.0
    cdef int err = 0           # 1 = OOM, 2 = past scheduling, 3 = empty service slot
    cdef double t, t0, g, dur, measured, cs
    cdef uint8_t kind, probe
    cdef int64_t a, b, rid, c, e
    cdef Py_ssize_t i, primary, slot, nprobes, best
    cdef int64_t load, best_load
    cdef uint64_t item
    cdef int64_t pend_arrival = 0, pend_sent = 0, pend_end = 0, pend_resp = 0
    cdef double[::1] samples_view

    if heap_init(&heap, 4096) != 0:
        raise MemoryError
    fifos = <Fifo *>malloc(E * sizeof(Fifo))
    req_client = <int64_t *>malloc(req_cap * sizeof(int64_t))
    req_created = <double *>malloc(req_cap * sizeof(double))
    req_ops = <double *>malloc(req_cap * sizeof(double))
    req_copies = <int32_t *>malloc(req_cap * sizeof(int32_t))
    req_responded = <int32_t *>malloc(req_cap * sizeof(int32_t))
    req_recorded = <uint8_t *>malloc(req_cap * sizeof(uint8_t))
    samples = <double *>malloc(samp_cap * sizeof(double))
    if (fifos == NULL or req_client == NULL or req_created == NULL or
            req_ops == NULL or req_copies == NULL or req_responded == NULL or
            req_recorded == NULL or samples == NULL or probe_slots == NULL):
        raise MemoryError
    for i in range(E):
        fifos[i].buf = <uint64_t *>malloc(64 * sizeof(uint64_t))
        fifos[i].head = 0
        fifos[i].len = 0
        fifos[i].cap = 64
        if fifos[i].buf == NULL:
            raise MemoryError

    with nogil:
        # initial arrivals, in client order (matches the pure engine)
        for c in range(C):
            if arrival_kind[c] == 0:
                t0 = 0.0
            else:
                t0 = xo_exp(&st[c, 0, 0], arrival_param[c])
            if heap_push(&heap, t0, seq, EV_ARRIVAL, c, -1, 0) != 0:
                err = 1
                break
            seq += 1

        while err == 0 and heap.n > 0 and heap.time[0] <= horizon:
            t = heap.time[0]
            kind = heap.kind[0]
            a = heap.a[0]
            b = heap.b[0]
            probe = heap.probe[0]
            heap_pop(&heap)
            clock = t

            if kind == EV_ARRIVAL:
                c = a
                rid = next_rid
                next_rid += 1
                if rid == req_cap:
                    req_cap *= 2
                    req_client = <int64_t *>realloc(req_client, req_cap * sizeof(int64_t))
                    req_created = <double *>realloc(req_created, req_cap * sizeof(double))
                    req_ops = <double *>realloc(req_ops, req_cap * sizeof(double))
                    req_copies = <int32_t *>realloc(req_copies, req_cap * sizeof(int32_t))
                    req_responded = <int32_t *>realloc(req_responded, req_cap * sizeof(int32_t))
                    req_recorded = <uint8_t *>realloc(req_recorded, req_cap * sizeof(uint8_t))
                    if (req_client == NULL or req_created == NULL or req_ops == NULL or
                            req_copies == NULL or req_responded == NULL or req_recorded == NULL):
                        err = 1
                        break
                req_client[rid] = c
                req_created[rid] = t
                if ops_kind[c] == 0:
                    req_ops[rid] = ops_param[c]
                else:
                    req_ops[rid] = xo_exp(&st[c, 1, 0], ops_param[c])
                req_responded[rid] = 0
                req_recorded[rid] = 0
                created[c] += 1

                if arrival_kind[c] == 0:
                    g = arrival_param[c]
                else:
                    g = xo_exp(&st[c, 0, 0], arrival_param[c])
                if heap_push(&heap, t + g, seq, EV_ARRIVAL, c, -1, 0) != 0:
                    err = 1
                    break
                seq += 1

                nprobes = 0
                if policy_kind == PK_UNCOORDINATED:
                    primary = 0
                    for i in range(1, K):
                        if est[c, i] < est[c, primary] or (
                                est[c, i] == est[c, primary] and
                                pool[c, i] < pool[c, primary]):
                            primary = i
                    for i in range(K):
                        if i == primary:
                            continue
                        if xo_double(&st[c, 2, 0]) <= chi:
                            probe_slots[nprobes] = i
                            nprobes += 1
                elif policy_kind == PK_RANDOM:
                    primary = <Py_ssize_t>(xo_next(&st[c, 2, 0]) % <uint64_t>K)
                elif policy_kind == PK_ROUND_ROBIN:
                    primary = rr_next[c]
                    rr_next[c] = (rr_next[c] + 1) % K
                else:  # PK_ORACLE
                    best = 0
                    best_load = in_system[pool[c, 0]]
                    for i in range(1, K):
                        load = in_system[pool[c, i]]
                        if load < best_load or (load == best_load and
                                                pool[c, i] < pool[c, best]):
                            best = i
                            best_load = load
                    primary = best

                req_copies[rid] = <int32_t>(1 + nprobes)
                requests_sent[c] += 1
                probes_sent[c] += nprobes
                if heap_push(&heap, t + lat_req[c, primary], seq, EV_REQUEST_SENT,
                             rid, pool[c, primary], 0) != 0:
                    err = 1
                    break
                seq += 1
                for i in range(nprobes):
                    slot = probe_slots[i]
                    if heap_push(&heap, t + lat_req[c, slot], seq, EV_REQUEST_SENT,
                                 rid, pool[c, slot], 1) != 0:
                        err = 1
                        break
                    seq += 1

            elif kind == EV_REQUEST_SENT:
                rid = a
                e = b
                in_system[e] += 1
                if cur_rid[e] < 0:
                    seq += 1  # service_start record
                    dur = req_ops[rid] / speeds[e]
                    cur_rid[e] = rid
                    cur_probe[e] = probe
                    cur_start[e] = t
                    cur_dur[e] = dur
                    if heap_push(&heap, t + dur, seq, EV_SERVICE_END, rid, e, probe) != 0:
                        err = 1
                        break
                    seq += 1
                else:
                    if fifo_push(&fifos[e], (<uint64_t>rid << 1) | probe) != 0:
                        err = 1
                        break

            elif kind == EV_SERVICE_END:
                e = b
                rid = cur_rid[e]
                if rid < 0:
                    err = 3
                    break
                probe = cur_probe[e]
                busy_total[e] += cur_dur[e]
                cs = cur_start[e]
                if cs < warmup:
                    cs = warmup
                if t > cs:
                    busy_meas[e] += t - cs
                served_count[e] += 1
                served_ops[e] += req_ops[rid]
                cur_rid[e] = -1
                if fifos[e].len > 0:
                    item = fifo_pop(&fifos[e])
                    seq += 1  # service_start record
                    cur_rid[e] = <int64_t>(item >> 1)
                    cur_probe[e] = <uint8_t>(item & 1)
                    dur = req_ops[cur_rid[e]] / speeds[e]
                    cur_start[e] = t
                    cur_dur[e] = dur
                    if heap_push(&heap, t + dur, seq, EV_SERVICE_END,
                                 cur_rid[e], e, cur_probe[e]) != 0:
                        err = 1
                        break
                    seq += 1
                in_system[e] -= 1
                c = req_client[rid]
                slot = pool_slot[c, e]
                if heap_push(&heap, t + lat_resp[c, slot], seq, EV_RESPONSE,
                             rid, e, probe) != 0:
                    err = 1
                    break
                seq += 1

            else:  # EV_RESPONSE
                rid = a
                e = b
                c = req_client[rid]
                measured = t - req_created[rid]
                if policy_kind == PK_UNCOORDINATED:
                    slot = pool_slot[c, e]
                    est[c, slot] = (1.0 - alpha) * est[c, slot] + alpha * measured
                req_responded[rid] += 1
                if req_recorded[rid] == 0:
                    req_recorded[rid] = 1
                    completed += 1
                    if t >= warmup:
                        if samp_n == samp_cap:
                            samp_cap *= 2
                            samples = <double *>realloc(samples, samp_cap * sizeof(double))
                            if samples == NULL:
                                err = 1
                                break
                        samples[samp_n] = measured
                        samp_n += 1
                        traffic += req_copies[rid] * (in_bytes[c] + out_bytes[c])
                if req_responded[rid] == req_copies[rid]:
                    fully += 1

        # credit the still-running services up to the horizon
        if err == 0:
            for e in range(E):
                if cur_rid[e] >= 0:
                    cs = cur_start[e]
                    if cs < warmup:
                        cs = warmup
                    if horizon > cs:
                        busy_meas[e] += horizon - cs
            for i in range(heap.n):
                if heap.kind[i] == EV_ARRIVAL:
                    pend_arrival += 1
                elif heap.kind[i] == EV_REQUEST_SENT:
                    pend_sent += 1
                elif heap.kind[i] == EV_SERVICE_END:
                    pend_end += 1
                else:
                    pend_resp += 1

    try:
        if err == 1:
            raise MemoryError
        if err == 2:
            raise RuntimeError("kernel: scheduled an event in the past")
        if err == 3:
            raise RuntimeError("kernel: service_end with empty in-service slot")
        samples_np = np.empty(samp_n, dtype=np.float64)
        if samp_n > 0:
            samples_view = samples_np
            for i in range(samp_n):
                samples_view[i] = samples[i]
        queue_lens_np = np.empty(E, dtype=np.int64)
        for e in range(E):
            queue_lens_np[e] = fifos[e].len
        return {
            "delay_samples": samples_np,
            "traffic_bytes": traffic,
            "busy_measured": exec_state_np[3].copy(),
            "busy_total": exec_state_np[2].copy(),
            "served_count": served_count_np,
            "served_ops": exec_state_np[4].copy(),
            "requests_sent": requests_sent_np,
            "probes_sent": probes_sent_np,
            "created": created_np,
            "requests_completed": completed,
            "requests_fully_responded": fully,
            "pending": {"arrival": pend_arrival, "request_sent": pend_sent,
                        "service_end": pend_end, "response_received": pend_resp},
            "queue_lens": queue_lens_np,
            "in_service": (exec_cur_rid_np >= 0).astype(np.int64),
            "final_estimates": np.asarray(est).copy(),
        }
    finally:
        heap_free(&heap)
        for i in range(E):
            free(fifos[i].buf)
        free(fifos)
        free(req_client)
        free(req_created)
        free(req_ops)
        free(req_copies)
        free(req_responded)
        free(req_recorded)
        free(samples)
        free(probe_slots)
