package org.example.util;

import java.text.SimpleDateFormat;
import java.time.LocalDate;
import java.time.format.DateTimeFormatter;
import java.util.Date;

public final class DateUtils {

    private static final DateTimeFormatter ISO = DateTimeFormatter.ofPattern("yyyy-MM-dd");

    private DateUtils() {}

    public static String formatDate(Date date) {
        SimpleDateFormat format = new SimpleDateFormat("yyyy-MM-dd");
        return format.format(date);
    }

    public static LocalDate parseDate(String text) {
        return LocalDate.parse(text, ISO);
    }

    public enum Unit {
        DAY, WEEK;

        public int days() {
            return this == DAY ? 1 : 7;
        }
    }
}
