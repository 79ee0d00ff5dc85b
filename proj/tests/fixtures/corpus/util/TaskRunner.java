package org.example.util;

import java.util.List;
import java.util.concurrent.ExecutorService;
import java.util.concurrent.Executors;
import java.util.concurrent.Future;

public class TaskRunner implements AutoCloseable {

    private final ExecutorService pool;

    public TaskRunner(int threads) {
        this.pool = Executors.newFixedThreadPool(threads);
    }

    public <T> List<Future<T>> runTasks(List<java.util.concurrent.Callable<T>> tasks)
            throws InterruptedException {
        return pool.invokeAll(tasks);
    }

    @Override
    public void close() {
        pool.shutdown();
    }

    static class Worker implements Runnable {
        private final Runnable body;

        Worker(Runnable body) { this.body = body; }

        @Override
        public void run() { body.run(); }
    }
}
