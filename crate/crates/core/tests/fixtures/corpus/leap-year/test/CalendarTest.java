public class CalendarTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Calendar.isLeap(2000), "y2000");
        check(!Calendar.isLeap(1900), "y1900");
        check(Calendar.isLeap(2024), "y2024");
        check(Calendar.daysIn(2023, 2) == 28, "feb");
        check(Calendar.daysIn(2023, 9) == 30, "sep");
        System.out.println("OK");
    }
}
