public class Calendar {
    public static boolean isLeap(int year) {
        boolean leap = false;
        if (year % 4 == 0) {
            leap = true;
        }
        if (year % 100 == 0 && year % 400 == 0) {
            leap = false;
        }
        return leap;
    }

    public static int daysIn(int year, int month) {
        if (month == 2) {
            return isLeap(year) ? 29 : 28;
        }
        if (month == 4 || month == 6 || month == 9 || month == 11) {
            return 30;
        }
        return 31;
    }
}
